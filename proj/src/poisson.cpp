// SPDX-License-Identifier: Apache-2.0
#include "hexhp/poisson.hpp"

#include <algorithm>
#include <cmath>

#include "hexhp/conformity.hpp"
#include "hexhp/error.hpp"
#include "hexhp/geometry.hpp"

namespace hexhp {

const char* problem_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::Galerkin: return "galerkin";
    case ProblemKind::Primal: return "primal";
    case ProblemKind::Ultraweak: return "uw";
  }
  return "?";
}

ProblemKind parse_problem_kind(const std::string& s) {
  if (s == "galerkin") return ProblemKind::Galerkin;
  if (s == "primal") return ProblemKind::Primal;
  if (s == "uw" || s == "ultraweak") return ProblemKind::Ultraweak;
  fail(ErrorCode::Config, "unknown problem '" + s + "' (expected galerkin, primal or uw)");
}

const char* solution_name(SolutionKind k) {
  switch (k) {
    case SolutionKind::Smooth: return "smooth";
    case SolutionKind::Linear: return "linear";
    case SolutionKind::Quadratic: return "quadratic";
    case SolutionKind::BoundaryLayer: return "layer";
  }
  return "?";
}

SolutionKind parse_solution_kind(const std::string& s) {
  if (s == "smooth") return SolutionKind::Smooth;
  if (s == "linear") return SolutionKind::Linear;
  if (s == "quadratic") return SolutionKind::Quadratic;
  if (s == "layer") return SolutionKind::BoundaryLayer;
  fail(ErrorCode::Config, "unknown solution '" + s + "' (expected smooth, linear, quadratic or layer)");
}

double ManufacturedSolution::u(const Vec3& x) const {
  switch (kind) {
    case SolutionKind::Smooth:
      return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]) * std::sin(M_PI * x[2]);
    case SolutionKind::Linear: return x[0];
    case SolutionKind::Quadratic: return x.squaredNorm();
    case SolutionKind::BoundaryLayer: return x[0] + std::tanh((x[0] - 0.5) / layer_width);
  }
  return 0.0;
}

Vec3 ManufacturedSolution::grad(const Vec3& x) const {
  switch (kind) {
    case SolutionKind::Smooth: {
      double s[3], c[3];
      for (int d = 0; d < 3; ++d) {
        s[d] = std::sin(M_PI * x[d]);
        c[d] = std::cos(M_PI * x[d]);
      }
      return M_PI * Vec3(c[0] * s[1] * s[2], s[0] * c[1] * s[2], s[0] * s[1] * c[2]);
    }
    case SolutionKind::Linear: return Vec3(1, 0, 0);
    case SolutionKind::Quadratic: return 2.0 * x;
    case SolutionKind::BoundaryLayer: {
      double sech = 1.0 / std::cosh((x[0] - 0.5) / layer_width);
      return Vec3(1.0 + sech * sech / layer_width, 0, 0);
    }
  }
  return Vec3::Zero();
}

double ManufacturedSolution::f(const Vec3& x) const {
  switch (kind) {
    case SolutionKind::Smooth: return 3.0 * M_PI * M_PI * u(x);
    case SolutionKind::Linear: return 0.0;
    case SolutionKind::Quadratic: return -6.0;
    case SolutionKind::BoundaryLayer: {
      double s = (x[0] - 0.5) / layer_width;
      double sech = 1.0 / std::cosh(s);
      return 2.0 * std::tanh(s) * sech * sech / (layer_width * layer_width);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------- physics

namespace {

struct Layout {
  const char* nick;
  Space space;
  int ncomp;
  bool trace;
};

std::vector<Layout> layout(ProblemKind k) {
  switch (k) {
    case ProblemKind::Galerkin: return {{"field", Space::H1, 1, false}};
    case ProblemKind::Primal:
      return {{"field", Space::H1, 1, false}, {"trace", Space::HDiv, 1, true}};
    case ProblemKind::Ultraweak:
      return {{"trace_a", Space::H1, 1, true},
              {"trace_b", Space::HDiv, 1, true},
              {"field", Space::L2, 1, false},
              {"grad", Space::L2, 3, false}};
  }
  return {};
}

}  // namespace

PhysicsTable default_physics(ProblemKind k) {
  PhysicsTable t;
  for (const auto& l : layout(k)) {
    PhysicsAttr a;
    a.nickname = l.nick;
    a.space = l.space;
    a.ncomp = l.ncomp;
    a.is_trace = l.trace;
    t.attrs.push_back(a);
  }
  return t;
}

void configure_physics(ProblemKind k, PhysicsTable& t) {
  auto lay = layout(k);
  if (t.attrs.size() != lay.size())
    fail(ErrorCode::Config, std::string("physics file does not match the ") + problem_name(k) +
                                " layout: expected " + std::to_string(lay.size()) + " attributes");
  for (size_t i = 0; i < lay.size(); ++i) {
    if (t.attrs[i].space != lay[i].space || t.attrs[i].ncomp != lay[i].ncomp)
      fail(ErrorCode::Config, "physics attribute " + std::to_string(i + 1) + " ('" +
                                  t.attrs[i].nickname + "') does not match the " + problem_name(k) +
                                  " layout");
    t.attrs[i].is_trace = lay[i].trace;
  }
  t.validate();
}

// --------------------------------------------------------------- elements

namespace {

std::array<int, 3> direction_orders(const ElementOrder& o) {
  std::array<int, 3> p{};
  for (int d = 0; d < 3; ++d)
    for (int e = 0; e < kNumEntities; ++e) p[d] = std::max(p[d], entity_order(o, e, d));
  return p;
}

// Broken H1 values/gradients (physical) at one point.
struct H1Eval {
  Eigen::VectorXd v;
  Eigen::MatrixXd g;  // 3 x n
  void fill(const ShapeSet& s, const GeometryData& gd) {
    const int n = s.nrdof;
    v.resize(n);
    g.resize(3, n);
    for (int k = 0; k < n; ++k) {
      v[k] = s.value[k];
      g.col(k) = piola_h1_grad(s.deriv[k], gd);
    }
  }
};

struct HDivEval {
  Eigen::MatrixXd t;  // 3 x n physical
  Eigen::VectorXd div;
  void fill(const ShapeSet& s, const GeometryData& gd) {
    const int n = s.nrdof;
    t.resize(3, n);
    div.resize(n);
    for (int k = 0; k < n; ++k) {
      t.col(k) = piola_hdiv_value(s.vec[k], gd);
      div[k] = piola_hdiv_div(s.div[k], gd);
    }
  }
};

OrderTriple enriched(const ElementOrder& o, int dp) {
  auto p = direction_orders(o);
  return {std::min(p[0] + dp, kMaxOrder), std::min(p[1] + dp, kMaxOrder),
          std::min(p[2] + dp, kMaxOrder)};
}

void fill_from_condensed(const DpgLocal& dl, const Eigen::MatrixXd& c, AlocBloc& ab) {
  const int nt = dl.sys.ntrial;
  const int na = static_cast<int>(dl.trial_attrs.size());
  for (int i = 0; i < na; ++i) {
    const int ai = dl.trial_attrs[i];
    const int oi = dl.trial_offset[i], ni = dl.trial_offset[i + 1] - oi;
    ab.itest[ai] = ab.itrial[ai] = 1;
    ab.bloc[ai] = c.col(nt).segment(oi, ni);
    for (int j = 0; j < na; ++j) {
      const int aj = dl.trial_attrs[j];
      const int oj = dl.trial_offset[j], nj = dl.trial_offset[j + 1] - oj;
      ab.block(ai, aj) = c.block(oi, oj, ni, nj);
    }
  }
}

DpgLocal primal_system(const PoissonProblem& pb, const Mesh& mesh, int mdle) {
  const ElementOrder o = mesh.element_order(mdle);
  const VertexCoords xnod = mesh.element_vertices(mdle);
  const OrderTriple tp = enriched(o, pb.dp);
  const int nH = dof_count(Space::H1, tp);
  const int n0 = dof_count(Space::H1, o);
  const int n1 = entity_offsets(Space::HDiv, o)[kMiddle];
  DpgLocal dl;
  dl.test_order = tp;
  dl.trial_attrs = {0, 1};
  dl.trial_offset = {0, n0, n0 + n1};
  auto& sys = dl.sys;
  sys.ntest = nH;
  sys.ntrial = n0 + n1;
  sys.stiff_all = Eigen::MatrixXd::Zero(nH, sys.ntrial + 1);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nH, nH);

  ShapeSet st, su, sv;
  H1Eval te, ue;
  auto rule = gauss_quadrature_3d({tp.px + 1, tp.py + 1, tp.pz + 1});
  for (size_t q = 0; q < rule.points.size(); ++q) {
    const Vec3& xi = rule.points[q];
    GeometryData gd = element_geometry(xnod, xi);
    const double w = rule.weights[q] * gd.rjac;
    broken_shape_functions(Space::H1, xi, tp, st);
    shape_functions(Space::H1, xi, o, su);
    te.fill(st, gd);
    ue.fill(su, gd);
    sys.stiff_all.leftCols(n0).noalias() += w * te.g.transpose() * ue.g;
    sys.stiff_all.col(sys.ntrial) += (w * pb.source(gd.x)) * te.v;
    G.noalias() += w * (te.v * te.v.transpose() + te.g.transpose() * te.g);
  }
  for (int f = 0; f < 6; ++f) {
    const auto ax = face_axes(f);
    const int n = face_normal_axis(f);
    const double s = face_side(f) ? 1.0 : -1.0;
    auto r2 = gauss_quadrature_2d(tp[ax[0]] + 1, tp[ax[1]] + 1);
    for (size_t q = 0; q < r2.points.size(); ++q) {
      const Vec3 xi = face_param(f, r2.points[q]).xi;
      const double w = r2.weights[q];
      broken_shape_functions(Space::H1, xi, tp, st);
      shape_functions(Space::HDiv, xi, o, sv);
      for (int k = 0; k < n1; ++k) {
        const double sn = s * sv.vec[k][n];
        if (sn == 0.0) continue;
        for (int i = 0; i < nH; ++i) sys.stiff_all(i, n0 + k) -= w * sn * st.value[i];
      }
    }
  }
  sys.gram = PackedSym::from_dense(G);
  return dl;
}

DpgLocal uw_system(const PoissonProblem& pb, const Mesh& mesh, int mdle) {
  const ElementOrder o = mesh.element_order(mdle);
  const VertexCoords xnod = mesh.element_vertices(mdle);
  const OrderTriple tp = enriched(o, pb.dp);
  const int nH = dof_count(Space::H1, tp);
  const int nV = dof_count(Space::HDiv, tp);
  const int nA = entity_offsets(Space::H1, o)[kMiddle];
  const int nB = entity_offsets(Space::HDiv, o)[kMiddle];
  const int nU = dof_count(Space::L2, o);
  const int c0 = 0, c1 = nA, c2 = nA + nB, c3 = c2 + nU, nt = c3 + 3 * nU;
  DpgLocal dl;
  dl.test_order = tp;
  dl.trial_attrs = {0, 1, 2, 3};
  dl.trial_offset = {c0, c1, c2, c3, nt};
  auto& sys = dl.sys;
  sys.ntest = nH + nV;
  sys.ntrial = nt;
  auto& S = sys.stiff_all;
  S = Eigen::MatrixXd::Zero(sys.ntest, nt + 1);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(sys.ntest, sys.ntest);

  ShapeSet sh, sv, sq, ua, ub;
  H1Eval te;
  HDivEval ve;
  Eigen::VectorXd qv(nU);
  auto rule = gauss_quadrature_3d({tp.px + 1, tp.py + 1, tp.pz + 1});
  for (size_t q = 0; q < rule.points.size(); ++q) {
    const Vec3& xi = rule.points[q];
    GeometryData gd = element_geometry(xnod, xi);
    const double w = rule.weights[q] * gd.rjac;
    broken_shape_functions(Space::H1, xi, tp, sh);
    broken_shape_functions(Space::HDiv, xi, tp, sv);
    shape_functions(Space::L2, xi, o, sq);
    te.fill(sh, gd);
    ve.fill(sv, gd);
    for (int k = 0; k < nU; ++k) qv[k] = piola_l2_value(sq.value[k], gd);
    // (sigma, grad v)
    for (int k = 0; k < nU; ++k)
      for (int c = 0; c < 3; ++c) S.block(0, c3 + 3 * k + c, nH, 1) += (w * qv[k]) * te.g.row(c).transpose();
    // (u, div tau) and (sigma, tau)
    S.block(nH, c2, nV, nU).noalias() += w * ve.div * qv.transpose();
    for (int k = 0; k < nU; ++k)
      for (int c = 0; c < 3; ++c) S.block(nH, c3 + 3 * k + c, nV, 1) += (w * qv[k]) * ve.t.row(c).transpose();
    S.block(0, nt, nH, 1) += (w * pb.source(gd.x)) * te.v;
    G.topLeftCorner(nH, nH).noalias() += w * (te.v * te.v.transpose() + te.g.transpose() * te.g);
    G.topRightCorner(nH, nV).noalias() += w * te.g.transpose() * ve.t;
    G.bottomRightCorner(nV, nV).noalias() +=
        w * (ve.div * ve.div.transpose() + 2.0 * ve.t.transpose() * ve.t);
  }
  G.bottomLeftCorner(nV, nH) = G.topRightCorner(nH, nV).transpose();
  for (int f = 0; f < 6; ++f) {
    const auto ax = face_axes(f);
    const int n = face_normal_axis(f);
    const double s = face_side(f) ? 1.0 : -1.0;
    auto r2 = gauss_quadrature_2d(tp[ax[0]] + 1, tp[ax[1]] + 1);
    for (size_t q = 0; q < r2.points.size(); ++q) {
      const Vec3 xi = face_param(f, r2.points[q]).xi;
      const double w = r2.weights[q];
      broken_shape_functions(Space::H1, xi, tp, sh);
      broken_shape_functions(Space::HDiv, xi, tp, sv);
      shape_functions(Space::H1, xi, o, ua);
      shape_functions(Space::HDiv, xi, o, ub);
      // -<sigma_n, v>
      for (int k = 0; k < nB; ++k) {
        const double sn = s * ub.vec[k][n];
        if (sn == 0.0) continue;
        for (int i = 0; i < nH; ++i) S(i, c1 + k) -= w * sn * sh.value[i];
      }
      // -<u_hat, tau.n>
      for (int i = 0; i < nV; ++i) {
        const double tn = s * sv.vec[i][n];
        if (tn == 0.0) continue;
        for (int k = 0; k < nA; ++k) S(nH + i, c0 + k) -= w * tn * ua.value[k];
      }
    }
  }
  sys.gram = PackedSym::from_dense(G);
  return dl;
}

}  // namespace

void elem_galerkin(const PoissonProblem& pb, const Mesh& mesh, int mdle, AlocBloc& ab) {
  const ElementOrder o = mesh.element_order(mdle);
  const VertexCoords xnod = mesh.element_vertices(mdle);
  const int n = dof_count(Space::H1, o);
  auto p = direction_orders(o);
  auto rule = gauss_quadrature_3d({p[0] + 1, p[1] + 1, p[2] + 1});
  ab.itest[0] = ab.itrial[0] = 1;
  Eigen::MatrixXd& K = ab.block(0, 0);
  Eigen::VectorXd& F = ab.bloc[0];
  K = Eigen::MatrixXd::Zero(n, n);
  F = Eigen::VectorXd::Zero(n);
  ShapeSet sh;
  H1Eval e;
  for (size_t q = 0; q < rule.points.size(); ++q) {
    GeometryData gd = element_geometry(xnod, rule.points[q]);
    const double w = rule.weights[q] * gd.rjac;
    shape_functions(Space::H1, rule.points[q], o, sh);
    e.fill(sh, gd);
    K.noalias() += w * e.g.transpose() * e.g;
    F += (w * pb.source(gd.x)) * e.v;
  }
}

DpgLocal dpg_local_system(const PoissonProblem& pb, const Mesh& mesh, int mdle) {
  switch (pb.kind) {
    case ProblemKind::Primal: return primal_system(pb, mesh, mdle);
    case ProblemKind::Ultraweak: return uw_system(pb, mesh, mdle);
    case ProblemKind::Galerkin: break;
  }
  fail(ErrorCode::Unsupported, "the Galerkin problem has no DPG system");
}

void elem_primal_dpg(const PoissonProblem& pb, const Mesh& mesh, int mdle, AlocBloc& ab) {
  DpgLocal dl = primal_system(pb, mesh, mdle);
  Eigen::MatrixXd c = condense_dpg(dl.sys);
  fill_from_condensed(dl, c, ab);
}

void elem_uw_dpg(const PoissonProblem& pb, const Mesh& mesh, int mdle, AlocBloc& ab) {
  DpgLocal dl = uw_system(pb, mesh, mdle);
  Eigen::MatrixXd c = condense_dpg(dl.sys);
  fill_from_condensed(dl, c, ab);
}

ElementRoutine element_routine(const PoissonProblem& pb) {
  switch (pb.kind) {
    case ProblemKind::Galerkin:
      return [pb](const Mesh& m, int mdle, AlocBloc& ab) { elem_galerkin(pb, m, mdle, ab); };
    case ProblemKind::Primal:
      return [pb](const Mesh& m, int mdle, AlocBloc& ab) { elem_primal_dpg(pb, m, mdle, ab); };
    case ProblemKind::Ultraweak:
      return [pb](const Mesh& m, int mdle, AlocBloc& ab) { elem_uw_dpg(pb, m, mdle, ab); };
  }
  return {};
}

double elem_residual(const PoissonProblem& pb, const Mesh& mesh, int mdle) {
  if (pb.kind == ProblemKind::Galerkin)
    fail(ErrorCode::Unsupported, "the Galerkin problem has no built-in residual estimator");
  DpgLocal dl = dpg_local_system(pb, mesh, mdle);
  const int nt = dl.sys.ntrial;
  Eigen::VectorXd w(nt);
  ModifiedElement me = modified_element(mesh, mdle);
  if (!mesh.solved()) fail(ErrorCode::State, "elem_residual: mesh has no current solution");
  for (size_t i = 0; i < dl.trial_attrs.size(); ++i) {
    Eigen::VectorXd v = local_values(mesh, me, dl.trial_attrs[i]);
    if (v.size() != dl.trial_offset[i + 1] - dl.trial_offset[i])
      fail(ErrorCode::Contract, "elem_residual: trial size mismatch");
    w.segment(dl.trial_offset[i], v.size()) = v;
  }
  packed_cholesky(dl.sys.gram);
  return dpg_residual(dl.sys.gram, dl.sys.stiff_all.leftCols(nt), dl.sys.stiff_all.col(nt), w);
}

ExactError compute_exact_error(const PoissonProblem& pb, const Mesh& mesh) {
  if (!pb.exact) fail(ErrorCode::Unsupported, "exact error requires a known solution (NEXACT=1)");
  if (!mesh.solved()) fail(ErrorCode::State, "exact error: mesh has no current solution");
  ExactError err;
  const auto& order = mesh.elem_order();
  err.elem_h1_sq.assign(order.size(), 0.0);
  err.elem_l2_sq.assign(order.size(), 0.0);
  for (size_t ie = 0; ie < order.size(); ++ie) {
    const int mdle = order[ie];
    const ElementOrder o = mesh.element_order(mdle);
    const VertexCoords xnod = mesh.element_vertices(mdle);
    auto p = direction_orders(o);
    auto rule = gauss_quadrature_3d({p[0] + 2, p[1] + 2, p[2] + 2});
    ModifiedElement me = modified_element(mesh, mdle);
    ShapeSet sh;
    double e1 = 0.0, e0 = 0.0;
    if (pb.kind == ProblemKind::Ultraweak) {
      Eigen::VectorXd cu = local_values(mesh, me, 2), cs = local_values(mesh, me, 3);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        GeometryData gd = element_geometry(xnod, rule.points[q]);
        const double w = rule.weights[q] * gd.rjac;
        shape_functions(Space::L2, rule.points[q], o, sh);
        double uh = 0.0;
        Vec3 sig = Vec3::Zero();
        for (int k = 0; k < sh.nrdof; ++k) {
          double v = piola_l2_value(sh.value[k], gd);
          uh += cu[k] * v;
          for (int c = 0; c < 3; ++c) sig[c] += cs[3 * k + c] * v;
        }
        e1 += w * (pb.solution.grad(gd.x) - sig).squaredNorm();
        e0 += w * std::pow(pb.solution.u(gd.x) - uh, 2);
      }
    } else {
      Eigen::VectorXd c = local_values(mesh, me, 0);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        GeometryData gd = element_geometry(xnod, rule.points[q]);
        const double w = rule.weights[q] * gd.rjac;
        shape_functions(Space::H1, rule.points[q], o, sh);
        double uh = 0.0;
        Vec3 g = Vec3::Zero();
        for (int k = 0; k < sh.nrdof; ++k) {
          uh += c[k] * sh.value[k];
          g += c[k] * piola_h1_grad(sh.deriv[k], gd);
        }
        e1 += w * (pb.solution.grad(gd.x) - g).squaredNorm();
        e0 += w * std::pow(pb.solution.u(gd.x) - uh, 2);
      }
    }
    err.elem_h1_sq[ie] = e1;
    err.elem_l2_sq[ie] = e0;
    err.h1 += e1;
    err.l2 += e0;
  }
  err.h1 = std::sqrt(err.h1);
  err.l2 = std::sqrt(err.l2);
  return err;
}

void set_dirichlet_flags(Mesh& mesh, const PoissonProblem& pb, const std::vector<int>& bids) {
  std::vector<int> ids = bids;
  if (ids.empty())
    for (int b = 0; b <= 9; ++b) ids.push_back(b);
  for (int b : ids) mesh.set_bcond(b, dirichlet_attr(pb.kind), 0, 1);
}

void apply_dirichlet(Mesh& mesh, const PoissonProblem& pb) {
  update_Ddof(mesh, [&pb](const Vec3& x, int, int, double& u, Vec3& g) {
    if (pb.exact) {
      u = pb.solution.u(x);
      g = pb.solution.grad(x);
    } else {
      u = 0.0;
      g = Vec3::Zero();
    }
  });
}

double evaluate_field(const PoissonProblem& pb, const Mesh& mesh, int mdle, const Vec3& xi) {
  const ElementOrder o = mesh.element_order(mdle);
  ModifiedElement me = modified_element(mesh, mdle);
  if (pb.kind == ProblemKind::Ultraweak) {
    Eigen::VectorXd c = local_values(mesh, me, 2);
    GeometryData gd = element_geometry(mesh.element_vertices(mdle), xi);
    ShapeSet sh = shape_functions(Space::L2, xi, o);
    double u = 0.0;
    for (int k = 0; k < sh.nrdof; ++k) u += c[k] * piola_l2_value(sh.value[k], gd);
    return u;
  }
  Eigen::VectorXd c = local_values(mesh, me, 0);
  ShapeSet sh = shape_functions(Space::H1, xi, o);
  double u = 0.0;
  for (int k = 0; k < sh.nrdof; ++k) u += c[k] * sh.value[k];
  return u;
}

}  // namespace hexhp
