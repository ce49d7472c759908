// SPDX-License-Identifier: Apache-2.0
//
// Dense kernels for element-level DPG condensation on a column-packed upper
// triangle: G(i,j), i <= j, lives at j*(j+1)/2 + i (0-based).
#pragma once

#include <vector>

#include <Eigen/Dense>

namespace hexhp {

struct PackedSym {
  int n = 0;
  std::vector<double> a;

  PackedSym() = default;
  explicit PackedSym(int n_) : n(n_), a(static_cast<size_t>(n_) * (n_ + 1) / 2, 0.0) {}
  static int index(int i, int j) { return j * (j + 1) / 2 + i; }
  double& operator()(int i, int j) { return i <= j ? a[index(i, j)] : a[index(j, i)]; }
  double operator()(int i, int j) const { return i <= j ? a[index(i, j)] : a[index(j, i)]; }

  static PackedSym from_dense(const Eigen::MatrixXd& g);
  Eigen::MatrixXd to_dense() const;
};

// In-place Cholesky G = U^T U; the result holds U.  Throws Numeric with the
// failing pivot index if G is not positive definite.
void packed_cholesky(PackedSym& g);
// Overwrites rhs (n x k) with U^{-T} rhs.
void packed_tri_solve(const PackedSym& u, Eigen::MatrixXd& rhs);
// Upper triangle of X^T X, mirrored.
Eigen::MatrixXd syrk_mirror(const Eigen::MatrixXd& x);

struct DpgElementSystem {
  int ntest = 0;
  int ntrial = 0;
  Eigen::MatrixXd stiff_all;  // ntest x (ntrial + 1): [B | l]
  PackedSym gram;
};

// (ntrial+1)^2 block B~^T B~ with B~ = U^{-T} [B | l].  The leading ntrial
// block is the condensed stiffness, the last column the condensed load.
Eigen::MatrixXd condense_dpg(DpgElementSystem& sys);

// ||U^{-T} (l - B w)||^2 for a factored Gram matrix.
double dpg_residual(const PackedSym& u, const Eigen::MatrixXd& B, const Eigen::VectorXd& l,
                    const Eigen::VectorXd& w);

}  // namespace hexhp
