// SPDX-License-Identifier: Apache-2.0
#include "hexhp/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "hexhp/conformity.hpp"
#include "hexhp/error.hpp"

namespace hexhp {

const char* mark_strategy_name(MarkStrategy s) {
  return s == MarkStrategy::Greedy ? "greedy" : "doerfler";
}

MarkStrategy parse_mark_strategy(const std::string& s) {
  if (s == "greedy") return MarkStrategy::Greedy;
  if (s == "doerfler" || s == "dorfler") return MarkStrategy::Doerfler;
  fail(ErrorCode::Config, "unknown marking strategy '" + s + "' (expected greedy or doerfler)");
}

void MarkingConfig::validate() const {
  if (!(perc > 0.0 && perc <= 1.0))
    fail(ErrorCode::Config, "marking coefficient must lie in (0,1], got " + std::to_string(perc));
}

double ErrorSummary::error_max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double ErrorSummary::error_glob() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

std::vector<int> select_marked(const ErrorSummary& errors, const MarkingConfig& cfg) {
  cfg.validate();
  if (errors.values.empty()) fail(ErrorCode::State, "marking: no active elements");
  if (errors.values.size() != errors.mdles.size())
    fail(ErrorCode::Contract, "marking: ids and indicators differ in length");
  std::vector<int> out;
  if (cfg.strategy == MarkStrategy::Greedy) {
    const double thr = cfg.perc * errors.error_max();
    for (size_t i = 0; i < errors.values.size(); ++i)
      if (errors.values[i] > thr) out.push_back(errors.mdles[i]);
    return out;
  }
  std::vector<size_t> idx(errors.values.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (errors.values[a] != errors.values[b]) return errors.values[a] > errors.values[b];
    return errors.mdles[a] < errors.mdles[b];
  });
  const double thr = cfg.perc * errors.error_glob();
  double sum = 0.0;
  for (size_t i : idx) {
    out.push_back(errors.mdles[i]);
    sum += errors.values[i];
    if (sum > thr) break;
  }
  return out;
}

std::vector<std::pair<int, int>> mark_elements(const Mesh& mesh, const ErrorSummary& errors,
                                               const MarkingConfig& cfg) {
  std::vector<std::pair<int, int>> out;
  for (int m : select_marked(errors, cfg)) out.emplace_back(m, mesh.get_isoref(m));
  return out;
}

ErrorSummary estimate_errors(const PoissonProblem& pb, const Mesh& mesh, int workers) {
  ErrorSummary s;
  s.mdles = mesh.elem_order();
  if (pb.kind == ProblemKind::Galerkin) {
    if (!pb.exact)
      fail(ErrorCode::Config,
           "no error estimator for the Galerkin problem without a known solution (NEXACT=0)");
    s.values = compute_exact_error(pb, mesh).elem_h1_sq;
    return s;
  }
  s.values.assign(s.mdles.size(), 0.0);
  parallel_for(static_cast<int>(s.mdles.size()), workers,
               [&](int i) { s.values[i] = elem_residual(pb, mesh, s.mdles[i]); });
  return s;
}

std::vector<HistoryRow> adaptive_loop(Mesh& mesh, const PoissonProblem& pb,
                                      const AdaptiveOptions& opt) {
  opt.marking.validate();
  if (opt.max_steps < 1) fail(ErrorCode::Config, "max_steps must be at least 1");
  if (pb.kind == ProblemKind::Galerkin && !pb.exact)
    fail(ErrorCode::Config,
         "no error estimator for the Galerkin problem without a known solution (NEXACT=0)");
  const ElementRoutine elem = element_routine(pb);
  std::vector<HistoryRow> rows;
  for (int step = 1; step <= opt.max_steps; ++step) {
    assemble_and_solve(mesh, elem, opt.solver);
    ErrorSummary est = estimate_errors(pb, mesh, opt.solver.workers);
    HistoryRow row;
    row.step = step;
    row.nreles = mesh.nreles();
    row.ndof = count_active_dofs(mesh);
    row.estimator = std::sqrt(est.error_glob());
    row.exact_error = pb.exact ? compute_exact_error(pb, mesh).h1
                               : std::numeric_limits<double>::quiet_NaN();
    if (opt.on_step) opt.on_step(step, mesh);
    const bool done = row.estimator <= opt.tol || step == opt.max_steps;
    if (!done) {
      for (auto [mdle, kref] : mark_elements(mesh, est, opt.marking)) {
        row.marked.push_back(mdle);
        mesh.refine(mdle, kref);
      }
      mesh.close_mesh();
      update_gdof(mesh);
      apply_dirichlet(mesh, pb);
    }
    rows.push_back(std::move(row));
    if (done) break;
  }
  return rows;
}

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& rows) {
  out << "step,nreles,ndof,estimator,exact_error\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.step << ',' << r.nreles << ',' << r.ndof << ',';
    std::snprintf(buf, sizeof buf, "%.10e", r.estimator);
    out << buf << ',';
    if (std::isnan(r.exact_error)) {
      out << "nan\n";
    } else {
      std::snprintf(buf, sizeof buf, "%.10e", r.exact_error);
      out << buf << '\n';
    }
  }
}

}  // namespace hexhp
