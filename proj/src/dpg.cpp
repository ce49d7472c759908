// SPDX-License-Identifier: Apache-2.0
#include "hexhp/dpg.hpp"

#include <cmath>
#include <string>

#include "hexhp/error.hpp"

namespace hexhp {

PackedSym PackedSym::from_dense(const Eigen::MatrixXd& g) {
  if (g.rows() != g.cols()) fail(ErrorCode::Contract, "packed matrix must be square");
  PackedSym p(static_cast<int>(g.rows()));
  for (int j = 0; j < p.n; ++j)
    for (int i = 0; i <= j; ++i) p.a[index(i, j)] = g(i, j);
  return p;
}

Eigen::MatrixXd PackedSym::to_dense() const {
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) g(i, j) = g(j, i) = a[index(i, j)];
  return g;
}

void packed_cholesky(PackedSym& g) {
  double* a = g.a.data();
  for (int j = 0; j < g.n; ++j) {
    double* cj = a + PackedSym::index(0, j);
    for (int i = 0; i < j; ++i) {
      const double* ci = a + PackedSym::index(0, i);
      double s = cj[i];
      for (int k = 0; k < i; ++k) s -= ci[k] * cj[k];
      cj[i] = s / ci[i];
    }
    double d = cj[j];
    for (int k = 0; k < j; ++k) d -= cj[k] * cj[k];
    if (!(d > 0.0))
      fail(ErrorCode::Numeric, "Gram matrix is not positive definite (pivot " +
                                   std::to_string(j + 1) + ")");
    cj[j] = std::sqrt(d);
  }
}

void packed_tri_solve(const PackedSym& u, Eigen::MatrixXd& rhs) {
  if (rhs.rows() != u.n) fail(ErrorCode::Contract, "packed_tri_solve: dimension mismatch");
  const double* a = u.a.data();
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
    double* x = rhs.col(c).data();
    for (int i = 0; i < u.n; ++i) {
      const double* ci = a + PackedSym::index(0, i);
      double s = x[i];
      for (int k = 0; k < i; ++k) s -= ci[k] * x[k];
      x[i] = s / ci[i];
    }
  }
}

Eigen::MatrixXd syrk_mirror(const Eigen::MatrixXd& x) {
  const Eigen::Index m = x.rows(), n = x.cols();
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* xj = x.col(j).data();
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double* xi = x.col(i).data();
      double s = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) s += xi[k] * xj[k];
      c(i, j) = s;
    }
  }
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) c(i, j) = c(j, i);
  return c;
}

Eigen::MatrixXd condense_dpg(DpgElementSystem& sys) {
  if (sys.gram.n != sys.ntest || sys.stiff_all.rows() != sys.ntest ||
      sys.stiff_all.cols() != sys.ntrial + 1)
    fail(ErrorCode::Contract, "condense_dpg: inconsistent system dimensions");
  packed_cholesky(sys.gram);
  packed_tri_solve(sys.gram, sys.stiff_all);
  return syrk_mirror(sys.stiff_all);
}

double dpg_residual(const PackedSym& u, const Eigen::MatrixXd& B, const Eigen::VectorXd& l,
                    const Eigen::VectorXd& w) {
  Eigen::MatrixXd r = l - B * w;
  packed_tri_solve(u, r);
  return r.squaredNorm();
}

}  // namespace hexhp
