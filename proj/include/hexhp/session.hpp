// SPDX-License-Identifier: Apache-2.0
//
// A configured Poisson run: files or built-in defaults, the mesh, the
// problem and the operations the driver and the C API expose.
#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hexhp/adapt.hpp"
#include "hexhp/physics.hpp"
#include "hexhp/poisson.hpp"
#include "hexhp/vtu.hpp"

namespace hexhp {

struct SessionConfig {
  std::string control_file;   // empty: defaults
  std::string physics_file;   // empty: built-in layout for the problem
  std::string geometry_file;  // empty: box of nx*ny*nz unit-cube elements
  int nx = 1, ny = 1, nz = 1;
  ProblemKind problem = ProblemKind::Galerkin;
  SolutionKind solution = SolutionKind::Smooth;
  double layer_width = 0.05;
  int p = 2;
  int dp = 0;      // 0: NORD_ADD from the control file
  int nexact = -1; // -1: control file, or 1 without one
  SolverOptions solver;
};

struct ConvergenceRow {
  int nreles = 0;
  int ndof = 0;
  double h1 = 0.0, l2 = 0.0;
  double estimator = 0.0;  // NaN for Galerkin
  double rate_h1 = 0.0, rate_l2 = 0.0;  // NaN on the first row
};

class Session {
 public:
  explicit Session(const SessionConfig& cfg);

  const SessionConfig& config() const { return cfg_; }
  const Parameters& parameters() const { return params_; }
  const PoissonProblem& problem() const { return pb_; }
  Mesh& mesh() { return *mesh_; }
  const Mesh& mesh() const { return *mesh_; }

  SolveReport solve();
  ExactError exact_error() const;
  // sqrt of the summed element residuals.
  double residual() const;

  void href_global();
  void pref_global();
  void refine_element(int mdle);

  std::vector<HistoryRow> adaptive(const AdaptiveOptions& opt);
  std::vector<ConvergenceRow> convergence(int nmeshes);

  void dump_nodes(std::ostream& out) const;
  void dump_elements(std::ostream& out) const;

 private:
  void after_mesh_change();

  SessionConfig cfg_;
  Parameters params_;
  PoissonProblem pb_;
  std::unique_ptr<Mesh> mesh_;
};

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

}  // namespace hexhp
