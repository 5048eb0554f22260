/* divexp: divided-difference expansion of the time evolution operator.
 *
 * Complex arrays are interleaved (re, im) pairs. Matrices are row-major, dim x dim.
 * Every function returning int returns a dx_status; on failure dx_last_error() holds
 * a message for the calling thread. */
#ifndef DIVEXP_DIVEXP_H
#define DIVEXP_DIVEXP_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(DIVEXP_BUILD)
#define DX_API __attribute__((visibility("default")))
#else
#define DX_API
#endif

typedef struct dx_model dx_model;

typedef enum {
  DX_OK = 0,
  DX_E_PARSE = 1,
  DX_E_VALIDATION = 2,
  DX_E_DEGENERATE = 3,
  DX_E_SINGULAR = 4,
  DX_E_BUDGET = 5,
  DX_E_CONVERGENCE = 6,
  DX_E_RANGE = 7,
  DX_E_ARGUMENT = 8,
  DX_E_INTERNAL = 99
} dx_status;

typedef enum { DX_METHOD_AUTO = 0, DX_METHOD_TUPLES = 1, DX_METHOD_BLOCK = 2 } dx_method;

enum { DX_GOLDEN_ZERO_REVISIONS = 1, DX_GOLDEN_SIN_APPROX = 2 };

DX_API const char* dx_last_error(void);
DX_API const char* dx_status_name(int status);
DX_API void dx_string_free(char* s);

/* Model: JSON {"energies": [...], "h1": [[[re, im], ...], ...], "labels": [...]} */
DX_API int dx_model_from_json(const char* text, dx_model** out);
DX_API int dx_model_load(const char* path, dx_model** out);
DX_API int dx_model_new(int dim, const double* energies, const double* h1, dx_model** out);
DX_API void dx_model_free(dx_model* m);
DX_API int dx_model_dim(const dx_model* m);
DX_API int dx_model_to_json(const dx_model* m, char** out);
/* Redivided levels E' = E + Re h1. */
DX_API int dx_model_shifted_energies(const dx_model* m, double* out);

/* Truncated propagation of psi0 (length dim). order < 0 picks the order from tol.
 * amps: n_times * dim complex; tails (nullable): n_times; order_used (nullable). */
DX_API int dx_propagate(const dx_model* m, const double* psi0, const double* times, int n_times, int order,
                        double tol, int method, double* amps, double* tails, int* order_used);
DX_API int dx_series_term(const dx_model* m, int l, double t, int method, double* out);
DX_API int dx_tail_bound(const dx_model* m, int order, double t, double* out);
DX_API int dx_oracle_eigensolve(const dx_model* m, double t, double* out);
DX_API int dx_oracle_block_order(const dx_model* m, int l, double t, double* out);
DX_API int dx_oracle_dyson_order(const dx_model* m, int l, double t, double quad_tol, double* out);

/* Each output array has dim entries; any may be NULL. */
DX_API int dx_revision_energies(const dx_model* m, int max_order, double* g2, double* g3, double* g4, double* g5,
                                double* shifted);
DX_API int dx_improved_energy(const dx_model* m, int level, int max_order, double* out);
/* amps: n_times * dim complex. */
DX_API int dx_improved_solution(const dx_model* m, const double* psi0, const double* times, int n_times, int order,
                                double* amps);
DX_API int dx_improved_transition(const dx_model* m, int from, int to, const double* times, int n_times,
                                  double* p_usual, double* p_improved, double* delta);
DX_API int dx_golden_rule(const dx_model* m, int from, int to, const double* energy, const double* rho, int n,
                          double T, int flags, double rel_tol, double* rate_usual, double* rate_delta);

/* Pattern pieces of order l at time t with the residual against the series term, as JSON. */
DX_API int dx_decompose_json(const dx_model* m, int l, double t, char** out);

typedef struct {
  int trials;
  int l_max;
  double max_below;
  double max_top;
  double max_recurrence_diff;
} dx_identity_report;

DX_API int dx_verify_identity(int l_max, int trials, unsigned long long seed, double min_gap,
                              dx_identity_report* out);

typedef struct {
  double omega, omega_t;
  double e1_exact, e2_exact;
  double e1_usual, e2_usual;
  double e1_improved, e2_improved;
  double omega_improved;
} dx_two_state_report;

/* E1 < E2 coupled by V12 = v_re + i v_im; improved energies through G^(4). */
DX_API int dx_two_state(double e1, double e2, double v_re, double v_im, dx_two_state_report* out);
/* Exact, usual and improved transition probabilities 1 -> 2. Any output may be NULL. */
DX_API int dx_two_state_transition(double e1, double e2, double v_re, double v_im, const double* times,
                                   int n_times, double* p_exact, double* p_usual, double* p_improved);

#ifdef __cplusplus
}
#endif

#endif
