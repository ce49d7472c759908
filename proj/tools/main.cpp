// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: scripted jobs (-job N) or the interactive menu (-job 0).
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hexhp/hexhp.h"

namespace {

struct Args {
  std::string control, phys, geom;
  std::string prob = "galerkin", solution = "smooth", mark = "doerfler", solver = "auto";
  std::string pv_dir, csv;
  int p = 2, dp = 0, job = 0, maxsteps = 3, vlevel = 0, workers = 0, nexact = -1;
  int nx = 1, ny = 1, nz = 1;
  double perc = 0.5, tol = 0.0;
};

// Rewrites single-dash long flags (-file-phys) into the double-dash form.
std::vector<std::string> normalize(int argc, char** argv) {
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a.size() > 2 && a[0] == '-' && a[1] != '-' && std::isalpha(static_cast<unsigned char>(a[1])))
      a = "-" + a;
    out.push_back(a);
  }
  std::reverse(out.begin(), out.end());  // CLI11 consumes from the back
  return out;
}

int report(int rc, const hexhp_session* s) {
  std::fprintf(stderr, "error (%s): %s\n", hexhp_status_name(rc), hexhp_last_error(s));
  return rc == HEXHP_ERR_CONFIG || rc == HEXHP_ERR_IO ? 2 : 1;
}

#define TRY(call, s)                     \
  do {                                   \
    int rc_ = (call);                    \
    if (rc_ != HEXHP_OK) return report(rc_, s); \
  } while (0)

void print_menu() {
  std::printf(
      "\n"
      " QUIT.......................................0\n"
      " Interactive graphics (unavailable).........1\n"
      " Interactive graphics (unavailable).........2\n"
      " ParaView export............................3\n"
      " Print node data............................10\n"
      " Print element data.........................11\n"
      " Single uniform h-refinement................20\n"
      " Single uniform p-refinement................21\n"
      " Refine a single element....................22\n"
      " Solve (built-in solver)....................30\n"
      " External solvers (unavailable).............31-33\n"
      " Compute exact error........................40\n"
      " Compute residual...........................41\n");
}

bool read_int(int& v) {
  std::string line;
  while (std::getline(std::cin, line)) {
    try {
      size_t pos = 0;
      v = std::stoi(line, &pos);
      if (line.find_first_not_of(" \t\r", pos) == std::string::npos) return true;
    } catch (const std::exception&) {
    }
    std::printf("invalid input, enter an integer\n");
  }
  return false;
}

void print_dump(hexhp_session* s, int what) {
  size_t n = 0;
  if (hexhp_describe(s, what, nullptr, 0, &n) != HEXHP_OK) return;
  std::string buf(n, '\0');
  hexhp_describe(s, what, buf.data(), n, &n);
  std::fputs(buf.c_str(), stdout);
}

int interactive(hexhp_session* s, const Args& a) {
  int vtu_count = 0;
  for (;;) {
    print_menu();
    int id;
    if (!read_int(id)) break;
    if (id == 0) break;
    int rc = HEXHP_OK;
    switch (id) {
      case 1: case 2: case 31: case 32: case 33:
        std::printf("unavailable in this build\n");
        break;
      case 3: {
        char name[32];
        std::snprintf(name, sizeof name, "hexhp_%04d", ++vtu_count);
        const std::string dir = a.pv_dir.empty() ? "." : a.pv_dir;
        rc = hexhp_export_vtu(s, dir.c_str(), name, a.vlevel);
        if (rc == HEXHP_OK) std::printf("wrote %s/%s.vtu\n", dir.c_str(), name);
        break;
      }
      case 10: print_dump(s, 0); break;
      case 11: print_dump(s, 1); break;
      case 20: rc = hexhp_href_global(s); break;
      case 21: rc = hexhp_pref_global(s); break;
      case 22: {
        std::printf("element (middle node id):\n");
        int mdle;
        if (!read_int(mdle)) break;
        rc = hexhp_refine_element(s, mdle);
        break;
      }
      case 30: {
        hexhp_solve_info info{};
        rc = hexhp_solve(s, &info);
        if (rc == HEXHP_OK)
          std::printf("solved: NRELES = %d, global dofs = %d, iterations = %d, relres = %.3e\n",
                      info.nreles, info.ndof, info.iterations, info.relres);
        break;
      }
      case 40: {
        double h1, l2;
        rc = hexhp_exact_error(s, &h1, &l2);
        if (rc == HEXHP_OK) std::printf("H1 seminorm error = %.6e, L2 error = %.6e\n", h1, l2);
        break;
      }
      case 41: {
        double r;
        rc = hexhp_residual(s, &r);
        if (rc == HEXHP_OK) std::printf("residual = %.6e\n", r);
        break;
      }
      default: continue;  // unknown id: menu is reprinted
    }
    if (rc != HEXHP_OK)
      std::printf("%s: %s\n", hexhp_status_name(rc), hexhp_last_error(s));
  }
  int n = 0;
  hexhp_nreles(s, &n);
  std::printf("NRELES = %d\n", n);
  return 0;
}

int job_convergence(hexhp_session* s, const Args& a) {
  std::string path = a.csv.empty() ? "convergence.csv" : a.csv;
  TRY(hexhp_convergence(s, a.maxsteps, path.c_str()), s);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int job_adaptive(hexhp_session* s, const Args& a) {
  std::string path = a.csv.empty() ? "adapt.csv" : a.csv;
  int steps = 0;
  TRY(hexhp_adaptive(s, a.mark == "greedy" ? HEXHP_MARK_GREEDY : HEXHP_MARK_DOERFLER, a.perc,
                     a.tol, a.maxsteps, path.c_str(),
                     a.pv_dir.empty() ? nullptr : a.pv_dir.c_str(), a.vlevel, &steps),
      s);
  std::printf("adaptive run: %d steps, wrote %s\n", steps, path.c_str());
  return 0;
}

// u = x must be reproduced exactly on one element and on a 1-irregular mesh.
int job_patch(const hexhp_options& base) {
  int failures = 0;
  const char* names[] = {"galerkin", "primal", "uw"};
  for (int prob = 0; prob < 3; ++prob)
    for (int irregular = 0; irregular < 2; ++irregular) {
      hexhp_options o = base;
      o.control_file = o.physics_file = o.geometry_file = nullptr;
      o.nx = o.ny = o.nz = 1;
      o.problem = prob;
      o.solution = HEXHP_LINEAR;
      o.nexact = 1;
      // The discontinuous field of the ultraweak form needs p >= 2 to hold x.
      o.p = prob == HEXHP_ULTRAWEAK ? 2 : 1;
      hexhp_session* s = nullptr;
      double h1 = NAN, l2 = NAN;
      int rc = hexhp_session_create(&o, &s);
      if (rc == HEXHP_OK && irregular) {
        rc = hexhp_href_global(s);
        int first = 0, n = 0;
        if (rc == HEXHP_OK) rc = hexhp_active_elements(s, &first, 1, &n);
        if (rc == HEXHP_OK) rc = hexhp_refine_element(s, first);
      }
      if (rc == HEXHP_OK) rc = hexhp_solve(s, nullptr);
      if (rc == HEXHP_OK) rc = hexhp_exact_error(s, &h1, &l2);
      const bool ok = rc == HEXHP_OK && h1 < 1e-9 && l2 < 1e-9;
      failures += !ok;
      std::printf("%-4s patch %-8s %-11s h1=%.2e l2=%.2e%s%s\n", ok ? "PASS" : "FAIL", names[prob],
                  irregular ? "1-irregular" : "single", h1, l2, rc ? "  " : "",
                  rc ? hexhp_last_error(s) : "");
      hexhp_session_destroy(s);
    }
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  Args a;
  CLI::App app{"hexhp: hp finite elements for the Poisson problem on hexahedral meshes"};
  app.add_option("--file-control", a.control, "control file");
  app.add_option("--file-phys", a.phys, "physics file");
  app.add_option("--file-geometry", a.geom, "geometry file (default: unit cube)");
  app.add_option("--prob", a.prob, "problem")->check(CLI::IsMember({"galerkin", "primal", "uw"}));
  app.add_option("--solution", a.solution, "manufactured solution")
      ->check(CLI::IsMember({"smooth", "linear", "quadratic", "layer"}));
  app.add_option("-p,--p", a.p, "initial order")->check(CLI::Range(1, 9));
  app.add_option("--dp", a.dp, "test-space enrichment (default from the control file)")
      ->check(CLI::Range(1, 3));
  app.add_option("--job", a.job, "0: interactive menu, 1: convergence, 2: adaptive, 3: patch tests");
  app.add_option("--mark", a.mark, "marking strategy")->check(CLI::IsMember({"greedy", "doerfler"}));
  app.add_option("--perc", a.perc, "marking coefficient")->check(CLI::Range(0.0, 1.0));
  app.add_option("--tol", a.tol, "adaptive tolerance on the estimator");
  app.add_option("--maxsteps", a.maxsteps, "meshes (job 1) or solves (job 2)")->check(CLI::PositiveNumber);
  app.add_option("--paraview-dir", a.pv_dir, "VTU output directory (must exist)");
  app.add_option("--vlevel", a.vlevel, "VTU upscaling level")->check(CLI::Range(0, 4));
  app.add_option("--solver", a.solver, "linear solver")->check(CLI::IsMember({"auto", "cg", "dense"}));
  app.add_option("--workers", a.workers, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--nexact", a.nexact, "1: known solution, 0: zero source and data")
      ->check(CLI::Range(0, 1));
  app.add_option("--nx", a.nx, "box elements in x")->check(CLI::PositiveNumber);
  app.add_option("--ny", a.ny, "box elements in y")->check(CLI::PositiveNumber);
  app.add_option("--nz", a.nz, "box elements in z")->check(CLI::PositiveNumber);
  app.add_option("--csv", a.csv, "CSV output path for jobs 1 and 2");
  try {
    app.parse(normalize(argc, argv));
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (auto [flag, path] : {std::pair{"-file-control", &a.control}, std::pair{"-file-phys", &a.phys},
                            std::pair{"-file-geometry", &a.geom}})
    if (!path->empty() && !std::filesystem::is_regular_file(*path)) {
      std::fprintf(stderr, "error: %s: file '%s' not found\n", flag, path->c_str());
      return 2;
    }
  if (!a.pv_dir.empty() && !std::filesystem::is_directory(a.pv_dir)) {
    std::fprintf(stderr, "error: -paraview-dir: directory '%s' does not exist\n", a.pv_dir.c_str());
    return 2;
  }
  if (a.job < 0 || a.job > 3) {
    std::fprintf(stderr, "error: unknown job id %d (expected 0..3)\n", a.job);
    return 2;
  }

  hexhp_options o;
  hexhp_default_options(&o);
  o.control_file = a.control.empty() ? nullptr : a.control.c_str();
  o.physics_file = a.phys.empty() ? nullptr : a.phys.c_str();
  o.geometry_file = a.geom.empty() ? nullptr : a.geom.c_str();
  o.nx = a.nx;
  o.ny = a.ny;
  o.nz = a.nz;
  static const std::map<std::string, int> probs{{"galerkin", HEXHP_GALERKIN},
                                                {"primal", HEXHP_PRIMAL},
                                                {"uw", HEXHP_ULTRAWEAK}};
  static const std::map<std::string, int> sols{{"smooth", HEXHP_SMOOTH},
                                               {"linear", HEXHP_LINEAR},
                                               {"quadratic", HEXHP_QUADRATIC},
                                               {"layer", HEXHP_LAYER}};
  static const std::map<std::string, int> solvers{
      {"auto", HEXHP_SOLVER_AUTO}, {"cg", HEXHP_SOLVER_CG}, {"dense", HEXHP_SOLVER_DENSE}};
  o.problem = probs.at(a.prob);
  o.solution = sols.at(a.solution);
  o.solver = solvers.at(a.solver);
  o.p = a.p;
  o.dp = a.dp;
  o.nexact = a.nexact;
  o.workers = a.workers;

  if (a.job == 3) return job_patch(o);

  hexhp_session* s = nullptr;
  TRY(hexhp_session_create(&o, &s), nullptr);
  int rc = 0;
  switch (a.job) {
    case 0: rc = interactive(s, a); break;
    case 1: rc = job_convergence(s, a); break;
    case 2: rc = job_adaptive(s, a); break;
  }
  hexhp_session_destroy(s);
  return rc;
}
