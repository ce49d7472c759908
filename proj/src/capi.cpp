// SPDX-License-Identifier: Apache-2.0
#include "hexhp/hexhp.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "hexhp/error.hpp"
#include "hexhp/session.hpp"

struct hexhp_session {
  std::unique_ptr<hexhp::Session> s;
  mutable std::string last_error;
};

namespace {

thread_local std::string g_last_error;

template <class F>
int guarded(const hexhp_session* s, F&& f) {
  try {
    f();
    return HEXHP_OK;
  } catch (const hexhp::Error& e) {
    (s ? s->last_error : g_last_error) = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    (s ? s->last_error : g_last_error) = "out of memory";
    return HEXHP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    (s ? s->last_error : g_last_error) = e.what();
    return HEXHP_ERR_INTERNAL;
  }
}

void need(bool ok, const char* what) {
  if (!ok) hexhp::fail(hexhp::ErrorCode::Contract, what);
}

hexhp::SolverKind solver_kind(int k) {
  switch (k) {
    case HEXHP_SOLVER_AUTO: return hexhp::SolverKind::Auto;
    case HEXHP_SOLVER_CG: return hexhp::SolverKind::Cg;
    case HEXHP_SOLVER_DENSE: return hexhp::SolverKind::Dense;
  }
  hexhp::fail(hexhp::ErrorCode::Config, "unknown solver kind " + std::to_string(k));
}

}  // namespace

extern "C" {

const char* hexhp_version(void) { return "0.1.0"; }

const char* hexhp_status_name(int status) {
  if (status == HEXHP_OK) return "ok";
  if (status == HEXHP_ERR_INTERNAL) return "internal";
  if (status >= HEXHP_ERR_CONFIG && status <= HEXHP_ERR_IRREGULAR)
    return hexhp::error_code_name(static_cast<hexhp::ErrorCode>(status));
  return "unknown";
}

void hexhp_default_options(hexhp_options* opt) {
  if (!opt) return;
  std::memset(opt, 0, sizeof *opt);
  opt->nx = opt->ny = opt->nz = 1;
  opt->problem = HEXHP_GALERKIN;
  opt->solution = HEXHP_SMOOTH;
  opt->p = 2;
  opt->dp = 0;
  opt->nexact = -1;
  opt->solver = HEXHP_SOLVER_AUTO;
  opt->solver_tol = 1e-13;
  opt->workers = 0;
}

int hexhp_session_create(const hexhp_options* opt, hexhp_session** out) {
  if (out) *out = nullptr;
  return guarded(nullptr, [&] {
    need(opt && out, "hexhp_session_create: null argument");
    hexhp::SessionConfig c;
    if (opt->control_file) c.control_file = opt->control_file;
    if (opt->physics_file) c.physics_file = opt->physics_file;
    if (opt->geometry_file) c.geometry_file = opt->geometry_file;
    c.nx = opt->nx;
    c.ny = opt->ny;
    c.nz = opt->nz;
    if (opt->problem < 0 || opt->problem > 2)
      hexhp::fail(hexhp::ErrorCode::Config, "unknown problem kind");
    if (opt->solution < 0 || opt->solution > 3)
      hexhp::fail(hexhp::ErrorCode::Config, "unknown solution kind");
    c.problem = static_cast<hexhp::ProblemKind>(opt->problem);
    c.solution = static_cast<hexhp::SolutionKind>(opt->solution);
    c.p = opt->p;
    c.dp = opt->dp;
    c.nexact = opt->nexact;
    c.solver.kind = solver_kind(opt->solver);
    if (opt->solver_tol > 0) c.solver.tol = opt->solver_tol;
    c.solver.workers = opt->workers;
    auto h = std::make_unique<hexhp_session>();
    h->s = std::make_unique<hexhp::Session>(c);
    *out = h.release();
  });
}

void hexhp_session_destroy(hexhp_session* s) { delete s; }

const char* hexhp_last_error(const hexhp_session* s) {
  return s ? s->last_error.c_str() : g_last_error.c_str();
}

int hexhp_nreles(const hexhp_session* s, int* n) {
  return guarded(s, [&] {
    need(s && n, "null argument");
    *n = s->s->mesh().nreles();
  });
}

int hexhp_nrnodes(const hexhp_session* s, int* n) {
  return guarded(s, [&] {
    need(s && n, "null argument");
    *n = s->s->mesh().nrnodes();
  });
}

int hexhp_ndof(const hexhp_session* s, int* n) {
  return guarded(s, [&] {
    need(s && n, "null argument");
    *n = hexhp::count_active_dofs(s->s->mesh());
  });
}

int hexhp_active_elements(const hexhp_session* s, int* ids, int cap, int* n) {
  return guarded(s, [&] {
    need(s && n, "null argument");
    const auto& e = s->s->mesh().elem_order();
    *n = static_cast<int>(e.size());
    if (ids)
      for (int i = 0; i < cap && i < *n; ++i) ids[i] = e[i];
  });
}

int hexhp_solve(hexhp_session* s, hexhp_solve_info* info) {
  return guarded(s, [&] {
    need(s, "null session");
    hexhp::SolveReport r = s->s->solve();
    if (info) {
      info->ndof = r.ndof;
      info->nreles = r.nreles;
      info->iterations = r.iterations;
      info->relres = r.relres;
    }
  });
}

int hexhp_exact_error(const hexhp_session* s, double* h1, double* l2) {
  return guarded(s, [&] {
    need(s, "null session");
    hexhp::ExactError e = s->s->exact_error();
    if (h1) *h1 = e.h1;
    if (l2) *l2 = e.l2;
  });
}

int hexhp_residual(const hexhp_session* s, double* residual) {
  return guarded(s, [&] {
    need(s && residual, "null argument");
    *residual = s->s->residual();
  });
}

int hexhp_href_global(hexhp_session* s) {
  return guarded(s, [&] {
    need(s, "null session");
    s->s->href_global();
  });
}

int hexhp_pref_global(hexhp_session* s) {
  return guarded(s, [&] {
    need(s, "null session");
    s->s->pref_global();
  });
}

int hexhp_refine_element(hexhp_session* s, int mdle) {
  return guarded(s, [&] {
    need(s, "null session");
    s->s->refine_element(mdle);
  });
}

int hexhp_evaluate(const hexhp_session* s, int mdle, int attr, const double xi[3], double* values,
                   int cap, int* n) {
  return guarded(s, [&] {
    need(s && xi && n, "null argument");
    auto v = hexhp::evaluate_attribute(s->s->mesh(), mdle, attr, hexhp::Vec3(xi[0], xi[1], xi[2]));
    *n = static_cast<int>(v.size());
    if (values)
      for (int i = 0; i < cap && i < *n; ++i) values[i] = v[i];
  });
}

int hexhp_export_vtu(const hexhp_session* s, const char* dir, const char* basename, int vlevel) {
  return guarded(s, [&] {
    need(s && dir && basename, "null argument");
    hexhp::ParaviewConfig pc;
    pc.dir = dir;
    pc.vlevel = vlevel;
    pc.dump_attr = s->s->mesh().solved();
    hexhp::export_vtu(s->s->mesh(), pc, basename);
  });
}

int hexhp_adaptive(hexhp_session* s, int marking, double perc, double tol, int max_steps,
                   const char* csv_path, const char* vtu_dir, int vlevel, int* steps) {
  return guarded(s, [&] {
    need(s, "null session");
    hexhp::AdaptiveOptions o;
    if (marking != HEXHP_MARK_GREEDY && marking != HEXHP_MARK_DOERFLER)
      hexhp::fail(hexhp::ErrorCode::Config, "unknown marking strategy");
    o.marking.strategy =
        marking == HEXHP_MARK_GREEDY ? hexhp::MarkStrategy::Greedy : hexhp::MarkStrategy::Doerfler;
    o.marking.perc = perc;
    o.tol = tol;
    o.max_steps = max_steps;
    std::unique_ptr<hexhp::PvdSeries> pvd;
    hexhp::ParaviewConfig pc;
    if (vtu_dir) {
      pc.dir = vtu_dir;
      pc.vlevel = vlevel;
      hexhp::upscale_samples(vlevel);  // validates before the first solve
      pvd = std::make_unique<hexhp::PvdSeries>(vtu_dir, "adapt");
      o.on_step = [&](int step, hexhp::Mesh& m) {
        char name[32];
        std::snprintf(name, sizeof name, "adapt_%04d", step);
        pvd->add(step, hexhp::export_vtu(m, pc, name));
        pvd->write();
      };
    }
    auto rows = s->s->adaptive(o);
    if (steps) *steps = static_cast<int>(rows.size());
    if (csv_path) {
      std::ofstream f(csv_path);
      if (!f) hexhp::fail(hexhp::ErrorCode::Io, std::string("cannot write '") + csv_path + "'");
      hexhp::write_history_csv(f, rows);
    }
  });
}

int hexhp_convergence(hexhp_session* s, int nmeshes, const char* csv_path) {
  return guarded(s, [&] {
    need(s, "null session");
    auto rows = s->s->convergence(nmeshes);
    if (csv_path) {
      std::ofstream f(csv_path);
      if (!f) hexhp::fail(hexhp::ErrorCode::Io, std::string("cannot write '") + csv_path + "'");
      hexhp::write_convergence_csv(f, rows);
    }
  });
}

int hexhp_describe(const hexhp_session* s, int what, char* buf, size_t cap, size_t* needed) {
  return guarded(s, [&] {
    need(s, "null session");
    std::ostringstream os;
    if (what == 0)
      s->s->dump_nodes(os);
    else if (what == 1)
      s->s->dump_elements(os);
    else
      hexhp::fail(hexhp::ErrorCode::Config, "unknown dump kind");
    const std::string t = os.str();
    if (needed) *needed = t.size() + 1;
    if (buf && cap > 0) {
      const size_t k = std::min(cap - 1, t.size());
      std::memcpy(buf, t.data(), k);
      buf[k] = '\0';
    }
  });
}

}  // extern "C"
