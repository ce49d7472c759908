// SPDX-License-Identifier: Apache-2.0
//
// Physics attributes, global parameters and the control/physics file readers.
#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "hexhp/masterel.hpp"

namespace hexhp {

struct PhysicsAttr {
  std::string nickname;
  Space space = Space::H1;
  int ncomp = 1;
  bool is_trace = false;
  bool enabled = true;
  bool homogeneous_dirichlet = false;
};

struct PhysicsTable {
  std::vector<PhysicsAttr> attrs;
  int maxnods = 100000;

  int nr_physa() const { return static_cast<int>(attrs.size()); }
  int nrindex() const;
  // Position of the first component of attribute `a` in the flattened
  // component list (length nrindex()).
  int comp_offset(int a) const;
  // Throws if the attribute sequence breaks the exact-sequence ordering or
  // requests a trace of a discontinuous variable.
  void validate() const;
};

Space parse_space_tag(const std::string& tag);

PhysicsTable parse_physics(std::istream& in);
PhysicsTable read_physics(const std::string& path);

struct Parameters {
  static constexpr int maxp = kMaxP;
  int working_maxp = kMaxP;
  int nrcoms = 1;
  int n_coms = 1;
  int nrrhs = 1;
  bool istc = true;
  bool store_stc = false;
  bool herm_stc = true;
  int nord_add = 1;
  int nexact = 0;
  int exgeom = 0;
};

Parameters parse_control(std::istream& in);
Parameters read_control(const std::string& path);

// Face 1 is the least significant decimal digit.
int encode_bc(const std::array<int, 6>& flags);
std::array<int, 6> decode_bc(int code);

}  // namespace hexhp
