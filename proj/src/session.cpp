// SPDX-License-Identifier: Apache-2.0
#include "hexhp/session.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "hexhp/conformity.hpp"
#include "hexhp/error.hpp"

namespace hexhp {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    case ErrorCode::Mesh: return "mesh";
    case ErrorCode::Order: return "order";
    case ErrorCode::State: return "state";
    case ErrorCode::Solve: return "solve";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Contract: return "contract";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Irregular: return "irregular";
  }
  return "unknown";
}

Session::Session(const SessionConfig& cfg) : cfg_(cfg) {
  if (cfg.p < 1 || cfg.p > kMaxP)
    fail(ErrorCode::Config, "order p must lie in 1.." + std::to_string(kMaxP));
  if (!cfg.control_file.empty()) params_ = read_control(cfg.control_file);
  PhysicsTable ph;
  if (cfg.physics_file.empty()) {
    ph = default_physics(cfg.problem);
  } else {
    ph = read_physics(cfg.physics_file);
    configure_physics(cfg.problem, ph);
  }
  pb_.kind = cfg.problem;
  pb_.solution.kind = cfg.solution;
  pb_.solution.layer_width = cfg.layer_width;
  pb_.dp = cfg.dp > 0 ? cfg.dp : params_.nord_add;
  if (pb_.dp < 1 || pb_.dp > kMaxEnrichment)
    fail(ErrorCode::Config, "enrichment dp must lie in 1.." + std::to_string(kMaxEnrichment));
  if (cfg.nexact >= 0)
    pb_.exact = cfg.nexact != 0;
  else
    pb_.exact = cfg.control_file.empty() ? true : params_.nexact != 0;
  // DPG trial spaces are only usable with interior dofs condensed.
  if (cfg.problem != ProblemKind::Galerkin) params_.istc = true;
  cfg_.solver.istc = params_.istc;
  cfg_.solver.store_stc = params_.store_stc;

  GeometryInput g = cfg.geometry_file.empty() ? box_geometry(cfg.nx, cfg.ny, cfg.nz)
                                              : read_geometry(cfg.geometry_file);
  mesh_ = std::make_unique<Mesh>(g, ph, OrderTriple::iso(cfg.p));
  set_dirichlet_flags(*mesh_, pb_);
  apply_dirichlet(*mesh_, pb_);
}

void Session::after_mesh_change() {
  update_gdof(*mesh_);
  apply_dirichlet(*mesh_, pb_);
}

SolveReport Session::solve() { return assemble_and_solve(*mesh_, element_routine(pb_), cfg_.solver); }

ExactError Session::exact_error() const { return compute_exact_error(pb_, *mesh_); }

double Session::residual() const {
  if (pb_.kind == ProblemKind::Galerkin)
    fail(ErrorCode::Unsupported, "the Galerkin problem has no built-in residual estimator");
  if (!mesh_->solved()) fail(ErrorCode::State, "residual: no current solution");
  return std::sqrt(estimate_errors(pb_, *mesh_, cfg_.solver.workers).error_glob());
}

void Session::href_global() {
  mesh_->global_refinement(GlobalRefinement::HRef);
  after_mesh_change();
}

void Session::pref_global() {
  mesh_->global_refinement(GlobalRefinement::PRef);
  after_mesh_change();
}

void Session::refine_element(int mdle) {
  mesh_->refine(mdle, mesh_->get_isoref(mdle));
  mesh_->close_mesh();
  after_mesh_change();
}

std::vector<HistoryRow> Session::adaptive(const AdaptiveOptions& opt) {
  AdaptiveOptions o = opt;
  o.solver = cfg_.solver;
  return adaptive_loop(*mesh_, pb_, o);
}

std::vector<ConvergenceRow> Session::convergence(int nmeshes) {
  if (nmeshes < 1) fail(ErrorCode::Config, "convergence study needs at least one mesh");
  if (!pb_.exact) fail(ErrorCode::Config, "convergence study requires a known solution (NEXACT=1)");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ConvergenceRow> rows;
  for (int i = 0; i < nmeshes; ++i) {
    if (i > 0) href_global();
    solve();
    ExactError e = exact_error();
    ConvergenceRow r;
    r.nreles = mesh_->nreles();
    r.ndof = count_active_dofs(*mesh_);
    r.h1 = e.h1;
    r.l2 = e.l2;
    r.estimator = pb_.kind == ProblemKind::Galerkin ? nan : residual();
    r.rate_h1 = r.rate_l2 = nan;
    if (!rows.empty()) {
      const auto& q = rows.back();
      const double lh = std::log(double(r.nreles) / q.nreles) / 3.0;
      r.rate_h1 = std::log(q.h1 / r.h1) / lh;
      r.rate_l2 = std::log(q.l2 / r.l2) / lh;
    }
    rows.push_back(r);
  }
  return rows;
}

void Session::dump_nodes(std::ostream& out) const {
  const Mesh& m = *mesh_;
  out << "NRNODES = " << m.nrnodes() << '\n';
  static const char* kinds[] = {"vert", "edge", "face", "mdle"};
  for (int id = 1; id <= m.nrnodes(); ++id) {
    const Node& n = m.node(id);
    out << "node " << id << " type=" << kinds[static_cast<int>(n.kind)] << " order=" << n.order
        << " father=" << n.father << " sons=" << n.sons.size() << " active=" << n.active;
    if (n.kind == EntityKind::Vertex)
      out << " x=(" << n.coords[0] << ',' << n.coords[1] << ',' << n.coords[2] << ')';
    out << '\n';
  }
}

void Session::dump_elements(std::ostream& out) const {
  const Mesh& m = *mesh_;
  out << "NRELES = " << m.nreles() << '\n';
  for (int mdle : m.elem_order()) {
    OrderTriple p = OrderTriple::decode(m.node(mdle).order);
    out << "element " << mdle << " order=" << p.encode() << " level=" << m.node(mdle).level
        << " father=" << m.father_element(mdle) << " vertices=";
    const auto& en = m.element_nodes(mdle);
    for (int v = 0; v < 8; ++v) out << (v ? "," : "") << en[v];
    out << '\n';
  }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "mesh,nreles,ndof,h1_error,l2_error,estimator,rate_h1,rate_l2\n";
  char buf[64];
  auto num = [&](double v) {
    if (std::isnan(v)) {
      out << "nan";
    } else {
      std::snprintf(buf, sizeof buf, "%.10e", v);
      out << buf;
    }
  };
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << i + 1 << ',' << r.nreles << ',' << r.ndof << ',';
    num(r.h1);
    out << ',';
    num(r.l2);
    out << ',';
    num(r.estimator);
    out << ',';
    num(r.rate_h1);
    out << ',';
    num(r.rate_l2);
    out << '\n';
  }
}

}  // namespace hexhp
