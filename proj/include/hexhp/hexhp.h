/* SPDX-License-Identifier: Apache-2.0 */
/* C interface to the hexahedral hp finite element kernel. */
#ifndef HEXHP_H
#define HEXHP_H

#include <stddef.h>

#if defined(HEXHP_BUILDING_LIBRARY)
#define HEXHP_API __attribute__((visibility("default")))
#else
#define HEXHP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hexhp_status {
  HEXHP_OK = 0,
  HEXHP_ERR_CONFIG = 1,
  HEXHP_ERR_IO = 2,
  HEXHP_ERR_MESH = 3,
  HEXHP_ERR_ORDER = 4,
  HEXHP_ERR_STATE = 5,
  HEXHP_ERR_SOLVE = 6,
  HEXHP_ERR_UNSUPPORTED = 7,
  HEXHP_ERR_CONTRACT = 8,
  HEXHP_ERR_NUMERIC = 9,
  HEXHP_ERR_IRREGULAR = 10,
  HEXHP_ERR_INTERNAL = 99
} hexhp_status;

typedef enum hexhp_problem { HEXHP_GALERKIN = 0, HEXHP_PRIMAL = 1, HEXHP_ULTRAWEAK = 2 } hexhp_problem;
typedef enum hexhp_solution {
  HEXHP_SMOOTH = 0,
  HEXHP_LINEAR = 1,
  HEXHP_QUADRATIC = 2,
  HEXHP_LAYER = 3
} hexhp_solution;
typedef enum hexhp_solver { HEXHP_SOLVER_AUTO = 0, HEXHP_SOLVER_CG = 1, HEXHP_SOLVER_DENSE = 2 } hexhp_solver;
typedef enum hexhp_marking { HEXHP_MARK_GREEDY = 0, HEXHP_MARK_DOERFLER = 1 } hexhp_marking;

typedef struct hexhp_options {
  const char* control_file;  /* NULL: defaults */
  const char* physics_file;  /* NULL: built-in layout */
  const char* geometry_file; /* NULL: nx*ny*nz box on the unit cube */
  int nx, ny, nz;
  int problem;  /* hexhp_problem */
  int solution; /* hexhp_solution */
  int p;
  int dp;     /* 0: from the control file */
  int nexact; /* -1: from the control file (1 without one) */
  int solver; /* hexhp_solver */
  double solver_tol;
  int workers; /* 0: all cores */
} hexhp_options;

typedef struct hexhp_solve_info {
  int ndof;
  int nreles;
  int iterations;
  double relres;
} hexhp_solve_info;

typedef struct hexhp_session hexhp_session;

HEXHP_API const char* hexhp_version(void);
HEXHP_API const char* hexhp_status_name(int status);
HEXHP_API void hexhp_default_options(hexhp_options* opt);

/* On failure *out is NULL and the message is available from
   hexhp_last_error(NULL). */
HEXHP_API int hexhp_session_create(const hexhp_options* opt, hexhp_session** out);
HEXHP_API void hexhp_session_destroy(hexhp_session* s);
/* Message of the last failed call on s (or of the calling thread if s is NULL). */
HEXHP_API const char* hexhp_last_error(const hexhp_session* s);

HEXHP_API int hexhp_nreles(const hexhp_session* s, int* n);
HEXHP_API int hexhp_nrnodes(const hexhp_session* s, int* n);
HEXHP_API int hexhp_ndof(const hexhp_session* s, int* n);
/* Active element ids in natural order; at most cap are copied, *n receives
   the full count. */
HEXHP_API int hexhp_active_elements(const hexhp_session* s, int* ids, int cap, int* n);

HEXHP_API int hexhp_solve(hexhp_session* s, hexhp_solve_info* info);
HEXHP_API int hexhp_exact_error(const hexhp_session* s, double* h1, double* l2);
HEXHP_API int hexhp_residual(const hexhp_session* s, double* residual);

HEXHP_API int hexhp_href_global(hexhp_session* s);
HEXHP_API int hexhp_pref_global(hexhp_session* s);
/* Refines one element and restores 1-irregularity. */
HEXHP_API int hexhp_refine_element(hexhp_session* s, int mdle);

/* Values of attribute attr (0-based) at master point xi of element mdle. */
HEXHP_API int hexhp_evaluate(const hexhp_session* s, int mdle, int attr, const double xi[3],
                             double* values, int cap, int* n);

/* Writes <dir>/<basename>.vtu; mesh only while the session is unsolved. */
HEXHP_API int hexhp_export_vtu(const hexhp_session* s, const char* dir, const char* basename,
                               int vlevel);

/* Adaptive loop; the history goes to csv_path (if non-NULL) and one VTU per
   step plus a PVD index to vtu_dir (if non-NULL). */
HEXHP_API int hexhp_adaptive(hexhp_session* s, int marking, double perc, double tol,
                             int max_steps, const char* csv_path, const char* vtu_dir,
                             int vlevel, int* steps);
/* Uniform h-refinement study over nmeshes meshes, written as CSV. */
HEXHP_API int hexhp_convergence(hexhp_session* s, int nmeshes, const char* csv_path);

/* Text dumps of the node table (what=0) or the active elements (what=1).
   *needed receives the size including the terminating NUL. */
HEXHP_API int hexhp_describe(const hexhp_session* s, int what, char* buf, size_t cap,
                             size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
