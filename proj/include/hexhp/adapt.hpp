// SPDX-License-Identifier: Apache-2.0
//
// Element marking and the solve / estimate / mark / refine driver.
#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hexhp/assembly.hpp"
#include "hexhp/poisson.hpp"

namespace hexhp {

enum class MarkStrategy { Greedy, Doerfler };

const char* mark_strategy_name(MarkStrategy s);
MarkStrategy parse_mark_strategy(const std::string& s);

struct MarkingConfig {
  MarkStrategy strategy = MarkStrategy::Doerfler;
  double perc = 0.5;
  void validate() const;
};

// Squared element indicators paired with element (middle node) ids.
struct ErrorSummary {
  std::vector<int> mdles;
  std::vector<double> values;
  double error_max() const;
  double error_glob() const;
};

// Marked element ids, in marking order (Doerfler: descending indicator).
std::vector<int> select_marked(const ErrorSummary& errors, const MarkingConfig& cfg);
// Marked elements with their refinement flags.
std::vector<std::pair<int, int>> mark_elements(const Mesh& mesh, const ErrorSummary& errors,
                                               const MarkingConfig& cfg);

// DPG residuals, or exact element errors for Galerkin with a known solution.
ErrorSummary estimate_errors(const PoissonProblem& pb, const Mesh& mesh, int workers = 0);

struct HistoryRow {
  int step = 0;
  int nreles = 0;
  int ndof = 0;
  double estimator = 0.0;    // sqrt of the summed indicators
  double exact_error = 0.0;  // NaN without a known solution
  std::vector<int> marked;   // empty on the last row
};

struct AdaptiveOptions {
  MarkingConfig marking;
  double tol = 0.0;
  int max_steps = 5;  // number of solves
  SolverOptions solver;
  std::function<void(int step, Mesh&)> on_step;  // after each solve
};

std::vector<HistoryRow> adaptive_loop(Mesh& mesh, const PoissonProblem& pb,
                                      const AdaptiveOptions& opt);

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& rows);

}  // namespace hexhp
