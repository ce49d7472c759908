// SPDX-License-Identifier: Apache-2.0
//
// Element-block containers, static condensation, global assembly and the
// built-in linear solvers.
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hexhp/conformity.hpp"
#include "hexhp/mesh.hpp"

namespace hexhp {

// Local element matrices organised in attribute blocks.  Block (i,j) couples
// test attribute i with trial attribute j and is read only if
// itest[i] && itrial[j].
struct AlocBloc {
  int nattr = 0;
  std::vector<char> itest, itrial;
  std::vector<Eigen::MatrixXd> aloc;  // nattr*nattr, row-major block index
  std::vector<Eigen::VectorXd> bloc;

  void reset(const std::vector<int>& sizes);
  Eigen::MatrixXd& block(int i, int j) { return aloc[i * nattr + j]; }
  const Eigen::MatrixXd& block(int i, int j) const { return aloc[i * nattr + j]; }
};

using ElementRoutine = std::function<void(const Mesh&, int mdle, AlocBloc&)>;

struct CondensedLocal {
  Eigen::MatrixXd K;  // interface stiffness
  Eigen::VectorXd f;
  // Kept when factors are stored: bubble block factor and coupling.
  bool stored = false;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  bool symmetric = true;
  Eigen::MatrixXd Kbi;
  Eigen::VectorXd fb;
};

// Eliminates the dofs flagged in `bubble` from K u = f.
CondensedLocal static_condense(const Eigen::MatrixXd& K, const Eigen::VectorXd& f,
                               const std::vector<char>& bubble, bool store,
                               bool symmetric = true);
// u_b = K_bb^{-1} (f_b - K_bi u_i).
Eigen::VectorXd recover_bubbles(const Eigen::MatrixXd& K, const Eigen::VectorXd& f,
                                const std::vector<char>& bubble, const Eigen::VectorXd& ui,
                                const CondensedLocal* stored = nullptr);

enum class SolverKind { Auto, Cg, Dense };

struct SolverOptions {
  SolverKind kind = SolverKind::Auto;
  double tol = 1e-13;
  int maxit = 0;  // 0: 10 * n + 100
  int workers = 0;  // 0: hardware concurrency
  bool istc = true;
  bool store_stc = false;
  bool symmetric = true;  // HERM_STC hint
  bool keep_system = false;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct SparseSystem {
  SparseMatrix A;
  Eigen::VectorXd b;
};

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relres = 0.0;
};

// Jacobi-preconditioned conjugate gradients.
CgResult cg_solve(const SparseMatrix& A, const Eigen::VectorXd& b, double tol, int maxit);
// Dense Cholesky solve; limited to 2000 unknowns.
Eigen::VectorXd dense_solve(const SparseMatrix& A, const Eigen::VectorXd& b);

struct SolveReport {
  int ndof = 0;          // global unknowns
  int nreles = 0;
  int iterations = 0;
  double relres = 0.0;
  bool dense = false;
  SparseSystem system;   // filled when keep_system
  Eigen::VectorXd x;     // global solution, filled when keep_system
};

// Global dof count of the current mesh (unknowns of the global system).
int count_global_dofs(const Mesh& mesh, bool istc);
// All dofs of active, unconstrained nodes over enabled attributes.
int count_active_dofs(const Mesh& mesh);

SolveReport assemble_and_solve(Mesh& mesh, const ElementRoutine& elem,
                               const SolverOptions& opt = {});

// Runs fn(i) for i in [0,n) on a pool of workers with dynamic scheduling.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace hexhp
