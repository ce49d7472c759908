// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <vector>

#include "hexhp/masterel.hpp"
#include "hexhp/mesh.hpp"
#include "hexhp/poisson.hpp"

namespace testsupport {

inline std::mt19937& rng() {
  static std::mt19937 g(12345);
  return g;
}

inline double uniform(double a = 0.0, double b = 1.0) {
  return std::uniform_real_distribution<double>(a, b)(rng());
}

inline hexhp::Vec3 random_point() { return hexhp::Vec3(uniform(), uniform(), uniform()); }

inline hexhp::Mesh box_mesh(hexhp::ProblemKind k, int nx, int ny, int nz, int p) {
  return hexhp::Mesh(hexhp::box_geometry(nx, ny, nz), hexhp::default_physics(k),
                     hexhp::OrderTriple::iso(p));
}

// Mesh with Dirichlet data of the given manufactured solution applied.
inline hexhp::Mesh problem_mesh(const hexhp::PoissonProblem& pb, int nx, int ny, int nz, int p) {
  hexhp::Mesh m = box_mesh(pb.kind, nx, ny, nz, p);
  hexhp::set_dirichlet_flags(m, pb);
  hexhp::apply_dirichlet(m, pb);
  return m;
}

inline hexhp::PoissonProblem make_problem(hexhp::ProblemKind k, hexhp::SolutionKind s, int dp = 1) {
  hexhp::PoissonProblem pb;
  pb.kind = k;
  pb.solution.kind = s;
  pb.exact = true;
  pb.dp = dp;
  return pb;
}

}  // namespace testsupport

#include <set>
#include <string>

namespace testsupport {

// Brute-force structural checks; returns an empty string when all hold.
inline std::string mesh_violations(hexhp::Mesh& m) {
  using namespace hexhp;
  std::vector<int> order = m.traverse_active();
  std::set<int> seen(order.begin(), order.end());
  if (seen.size() != order.size()) return "duplicate entries in the traversal";
  std::set<int> active;
  for (int id = 1; id <= m.nrnodes(); ++id) {
    const Node& n = m.node(id);
    if (n.kind != EntityKind::Middle) continue;
    if (n.sons.empty()) {
      active.insert(id);
    } else {
      if (n.sons.size() != 8) return "refined middle " + std::to_string(id) + " without 8 sons";
      for (int s : n.sons)
        if (m.node(s).father != id) return "son/father mismatch at " + std::to_string(s);
    }
  }
  if (active != seen) return "traversal does not match the set of active middles";
  if (m.nreles() != static_cast<int>(order.size()) ||
      m.elem_order().size() != order.size())
    return "element counters disagree";
  for (int mdle : order)
    for (int id : m.element_nodes(mdle)) {
      int p = m.constraining_parent(id);
      if (p != 0 && m.constraining_parent(p) != 0)
        return "node " + std::to_string(id) + " is constrained by a constrained node";
      if (m.multiply_constrained(id))
        return "node " + std::to_string(id) + " hangs more than one level";
    }
  return {};
}

}  // namespace testsupport
