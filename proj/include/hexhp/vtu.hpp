// SPDX-License-Identifier: Apache-2.0
//
// VTU/PVD output of the active mesh and the attribute fields, sampled on an
// upscaled lattice inside every element.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hexhp/mesh.hpp"

namespace hexhp {

inline constexpr int kMaxVlevel = 4;

struct ParaviewConfig {
  std::string dir = ".";
  int vlevel = 0;
  bool dump_geom = true;  // no effect: geometry is always written
  bool dump_attr = true;
  // Empty masks select everything.
  std::vector<char> attr_mask;
  std::vector<std::vector<char>> comp_mask;
};

struct SampleLattice {
  std::vector<Vec3> points;               // master coordinates
  std::vector<std::array<int, 8>> cells;  // VTK hexahedron ordering
};

SampleLattice upscale_samples(int vlevel);

// Values of attribute `a` at master point xi: ncomp scalars for H1/L2,
// ncomp 3-vectors (physical, after the Piola map) for H(curl)/H(div).
std::vector<double> evaluate_attribute(const Mesh& mesh, int mdle, int a, const Vec3& xi);

// Writes <dir>/<basename>.vtu and returns its path.
std::string export_vtu(const Mesh& mesh, const ParaviewConfig& cfg, const std::string& basename);

// Time series index; write() rewrites <dir>/<basename>.pvd with all entries.
class PvdSeries {
 public:
  PvdSeries(std::string dir, std::string basename);
  void add(double time, const std::string& vtu_file);
  std::string write() const;
  const std::vector<std::pair<double, std::string>>& entries() const { return entries_; }

 private:
  std::string dir_, basename_;
  std::vector<std::pair<double, std::string>> entries_;
};

}  // namespace hexhp
