// SPDX-License-Identifier: Apache-2.0
//
// Poisson problem -Lap u = f with Dirichlet data: manufactured solutions and
// the Galerkin, primal DPG and ultraweak DPG element routines.
#pragma once

#include <string>
#include <vector>

#include "hexhp/assembly.hpp"
#include "hexhp/dpg.hpp"
#include "hexhp/mesh.hpp"

namespace hexhp {

enum class ProblemKind { Galerkin, Primal, Ultraweak };
enum class SolutionKind { Smooth, Linear, Quadratic, BoundaryLayer };

const char* problem_name(ProblemKind k);
ProblemKind parse_problem_kind(const std::string& s);
const char* solution_name(SolutionKind k);
SolutionKind parse_solution_kind(const std::string& s);

struct ManufacturedSolution {
  SolutionKind kind = SolutionKind::Smooth;
  double layer_width = 0.05;

  double u(const Vec3& x) const;
  Vec3 grad(const Vec3& x) const;
  // -Lap u
  double f(const Vec3& x) const;
};

// Attribute layout expected by each discretization:
//   Galerkin  : field (H1)
//   Primal    : field (H1), trace (H(div) trace)
//   Ultraweak : trace_a (H1 trace), trace_b (H(div) trace), field (L2), grad (L2 x3)
PhysicsTable default_physics(ProblemKind k);
// Checks a table read from file against the layout above (Config error on
// mismatch) and marks the trace attributes.
void configure_physics(ProblemKind k, PhysicsTable& t);
// Index of the attribute carrying Dirichlet data.
inline int dirichlet_attr(ProblemKind) { return 0; }

struct PoissonProblem {
  ProblemKind kind = ProblemKind::Galerkin;
  ManufacturedSolution solution;
  bool exact = true;  // NEXACT
  int dp = 1;         // test-space enrichment

  double source(const Vec3& x) const { return exact ? solution.f(x) : 0.0; }
};

void elem_galerkin(const PoissonProblem& pb, const Mesh& mesh, int mdle, AlocBloc& ab);
void elem_primal_dpg(const PoissonProblem& pb, const Mesh& mesh, int mdle, AlocBloc& ab);
void elem_uw_dpg(const PoissonProblem& pb, const Mesh& mesh, int mdle, AlocBloc& ab);
ElementRoutine element_routine(const PoissonProblem& pb);

// Unfactored element DPG system [B | l] with its Gram matrix, and where each
// trial attribute starts among the columns of B.
struct DpgLocal {
  DpgElementSystem sys;
  std::vector<int> trial_attrs;
  std::vector<int> trial_offset;  // size trial_attrs + 1
  OrderTriple test_order;
};
DpgLocal dpg_local_system(const PoissonProblem& pb, const Mesh& mesh, int mdle);

// Squared element residual in the test norm; DPG problems only.
double elem_residual(const PoissonProblem& pb, const Mesh& mesh, int mdle);

struct ExactError {
  double h1 = 0.0;  // |u - u_h|_1 (ultraweak: ||grad u - sigma_h||)
  double l2 = 0.0;  // ||u - u_h||
  std::vector<double> elem_h1_sq;  // per active element in natural order
  std::vector<double> elem_l2_sq;
};
ExactError compute_exact_error(const PoissonProblem& pb, const Mesh& mesh);

// Sets Dirichlet flags on every exterior face for the Dirichlet attribute
// (boundary ids in `bids`, all ids if empty).
void set_dirichlet_flags(Mesh& mesh, const PoissonProblem& pb, const std::vector<int>& bids = {});
// Interpolates the Dirichlet data of the manufactured solution.
void apply_dirichlet(Mesh& mesh, const PoissonProblem& pb);

// Value of the primary scalar unknown at master point xi of an active
// element (field for Galerkin/primal, L2 field for ultraweak).
double evaluate_field(const PoissonProblem& pb, const Mesh& mesh, int mdle, const Vec3& xi);

}  // namespace hexhp
