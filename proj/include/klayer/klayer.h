/* C interface to the boundary-layer solvers. Every function that can fail
 * returns a klayer_status; the message of the most recent failure on the
 * calling thread is available from klayer_last_error(). Handles are opaque
 * and must be released with the matching *_free function. */
#ifndef KLAYER_H
#define KLAYER_H

#include <stddef.h>

#if defined(_WIN32)
#define KLAYER_API __declspec(dllexport)
#else
#define KLAYER_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum klayer_status {
    KLAYER_OK = 0,
    KLAYER_ERR_INVALID_ARGUMENT = 1,
    KLAYER_ERR_NO_CONVERGENCE = 2,
    KLAYER_ERR_BRACKET_FAILURE = 3,
    KLAYER_ERR_NO_CROSSING = 4,
    KLAYER_ERR_TIME_STEP = 5,
    KLAYER_ERR_POSITIVITY = 6,
    KLAYER_ERR_SINGULARITY = 7,
    KLAYER_ERR_IO = 8,
    KLAYER_ERR_CONFIG = 9,
    KLAYER_ERR_INTERNAL = 10
} klayer_status;

KLAYER_API const char* klayer_status_name(klayer_status status);
KLAYER_API const char* klayer_last_error(void);
KLAYER_API const char* klayer_version(void);

typedef struct klayer_params {
    double epsilon;
    double p;
    double b;
    double m;
    int n;
} klayer_params;

KLAYER_API klayer_params klayer_params_default(void);

/* ---- radial steady states ---- */

typedef struct klayer_radial_options {
    double R;
    int grid_count;
    double layer_fraction; /* boundary spacing = layer_fraction * predicted width / 10 */
    double newton_tol;
    double nonlocal_tol;   /* relative tolerance of the lambda bisection */
    int threads;           /* worker cap for sweeps */
} klayer_radial_options;

KLAYER_API klayer_radial_options klayer_radial_options_default(void);

typedef struct klayer_radial klayer_radial;

typedef struct klayer_radial_info {
    double amplitude;
    double lambda_eps;
    double sigma;
    double slope_W;  /* W'(R) */
    double slope_U;  /* U'(R) */
    double constraint_residual;
    int bisection_iters;
    size_t size;
} klayer_radial_info;

KLAYER_API klayer_status klayer_radial_solve(const klayer_params* params, const klayer_radial_options* opts,
                                             klayer_radial** out);
KLAYER_API klayer_status klayer_radial_info_get(const klayer_radial* h, klayer_radial_info* info);
/* Any of r, W, U may be NULL; the others receive info.size values. */
KLAYER_API klayer_status klayer_radial_copy(const klayer_radial* h, double* r, double* W, double* U);
KLAYER_API klayer_status klayer_radial_thickness(const klayer_radial* h, double c, double* thickness);
/* Largest amount by which W leaves the barrier sandwich (0 when inside). */
KLAYER_API klayer_status klayer_radial_barrier_violation(const klayer_radial* h, double* violation);
KLAYER_API void klayer_radial_free(klayer_radial* h);

/* ---- planar steady states ---- */

typedef enum klayer_shape_kind {
    KLAYER_SHAPE_DISK = 0,    /* radius a */
    KLAYER_SHAPE_ELLIPSE = 1, /* semi-axes a, b */
    KLAYER_SHAPE_STAR = 2     /* r = a (1 + amplitude cos(k theta)) */
} klayer_shape_kind;

typedef struct klayer_shape {
    klayer_shape_kind kind;
    double a;
    double b;
    double amplitude;
    int k;
} klayer_shape;

typedef struct klayer_planar_options {
    double h;
    int samples;       /* boundary samples for the thickness report */
    int gauss_seidel;  /* 0: global Newton, 1: nonlinear Gauss-Seidel */
    double tol;
    double nonlocal_tol;
} klayer_planar_options;

KLAYER_API klayer_planar_options klayer_planar_options_default(void);

typedef struct klayer_planar klayer_planar;

typedef struct klayer_planar_info {
    int nx;
    int ny;
    double x0;
    double y0;
    double h;
    size_t unknowns;
    double amplitude;
    double lambda_eps;
    double sigma;
    double constraint_residual;
    int bisection_iters;
} klayer_planar_info;

typedef struct klayer_thickness_row {
    double arclength;
    double curvature;
    double thickness;
    int valid;
} klayer_thickness_row;

KLAYER_API klayer_status klayer_planar_solve(const klayer_params* params, const klayer_shape* shape,
                                             const klayer_planar_options* opts, klayer_planar** out);
KLAYER_API klayer_status klayer_planar_info_get(const klayer_planar* h, klayer_planar_info* info);
/* Node (i, j) sits at (x0 + i h, y0 + j h) and is stored at j * nx + i.
 * inside[k] is 1 for nodes carrying an unknown. Any pointer may be NULL. */
KLAYER_API klayer_status klayer_planar_copy(const klayer_planar* h, double* W, double* U, unsigned char* inside);
KLAYER_API klayer_status klayer_planar_sample(const klayer_planar* h, double x, double y, double* W);
/* Writes up to capacity rows; *count receives the number of boundary samples. */
KLAYER_API klayer_status klayer_planar_thickness(const klayer_planar* h, double c, klayer_thickness_row* rows,
                                                 size_t capacity, size_t* count);
KLAYER_API void klayer_planar_free(klayer_planar* h);

/* Spearman rank correlation with average ranks for ties. */
KLAYER_API klayer_status klayer_spearman(const double* a, const double* b, size_t count, double* rho);
/* Standard deviation over mean. */
KLAYER_API klayer_status klayer_coefficient_of_variation(const double* v, size_t count, double* cv);

/* ---- time evolution ---- */

typedef struct klayer_evolve_options {
    double dt;
    double cfl_safety;
    double t_end;
    int output_every;
    double stop_distance;
    double perturb_u; /* u0 = U (1 + perturb_u cos(pi r / R)) */
    double perturb_w; /* w0 = W (1 + perturb_w cos(pi r / (2 R))) */
} klayer_evolve_options;

KLAYER_API klayer_evolve_options klayer_evolve_options_default(void);

typedef struct klayer_evolution klayer_evolution;

typedef struct klayer_diag_row {
    double t;
    double mass;
    double linf_u;
    double l2_u;
    double linf_w;
    double l2_w;
    double energy;
} klayer_diag_row;

typedef struct klayer_evolution_summary {
    size_t rows;
    long steps;
    int renormalized;
    double initial_mass;
    double max_step_mass_drift;
    double max_run_mass_drift;
    double mu_hat; /* NaN when the series is too short to fit */
} klayer_evolution_summary;

/* The steady state is a discrete fixed point only as far as the bisection
 * met its constraint; solve it with nonlocal_tol near 1e-12 before evolving.
 * Grids whose inner cells shrink far below the boundary spacing force tiny
 * steps through the advective limit.
 * Starts from the perturbation described in opts around the steady state. */
KLAYER_API klayer_status klayer_evolve(const klayer_radial* steady, const klayer_evolve_options* opts,
                                       klayer_evolution** out);
/* Starts from explicit nodal data u0, w0 on the steady-state grid. */
KLAYER_API klayer_status klayer_evolve_from(const klayer_radial* steady, const klayer_evolve_options* opts,
                                            const double* u0, const double* w0, klayer_evolution** out);
KLAYER_API klayer_status klayer_evolution_summary_get(const klayer_evolution* h, klayer_evolution_summary* s);
KLAYER_API klayer_status klayer_evolution_rows(const klayer_evolution* h, klayer_diag_row* rows, size_t capacity);
/* Final u and w = exp(v); either may be NULL. */
KLAYER_API klayer_status klayer_evolution_final(const klayer_evolution* h, double* u, double* w);
KLAYER_API void klayer_evolution_free(klayer_evolution* h);

KLAYER_API klayer_status klayer_fit_decay_rate(const double* t, const double* distance, size_t count,
                                               double* mu_hat);

/* ---- verification ---- */

typedef enum klayer_quantity {
    KLAYER_LAMBDA_EPS = 0,
    KLAYER_SLOPE_W = 1,
    KLAYER_SLOPE_U = 2,
    KLAYER_THICKNESS = 3
} klayer_quantity;

KLAYER_API const char* klayer_quantity_name(klayer_quantity q);

typedef struct klayer_expansion_row {
    klayer_quantity quantity;
    double predicted;
    double extrapolated;
    double relative_gap;
    double tolerance;
    int pass;
} klayer_expansion_row;

/* Fills rows[0..3] in klayer_quantity order from one sweep over eps
 * (strictly decreasing, at least three values). c is the thickness level. */
KLAYER_API klayer_status klayer_verify_expansions(const klayer_params* params, const klayer_radial_options* opts,
                                                  const double* eps, size_t count, double c,
                                                  klayer_expansion_row rows[4]);

typedef struct klayer_sweep_row {
    double epsilon;
    double lambda_eps;
    double sigma;
    double slope_W;
    double slope_U;
    double thickness; /* NaN when W never reaches c */
} klayer_sweep_row;

KLAYER_API klayer_status klayer_sweep_epsilon(const klayer_params* params, const klayer_radial_options* opts,
                                              const double* eps, size_t count, double c, klayer_sweep_row* rows);

typedef struct klayer_p_limit_row {
    double p;
    double sup_deviation;
    double boundary_mass_fraction;
} klayer_p_limit_row;

KLAYER_API klayer_status klayer_sweep_p(const klayer_params* params, const klayer_radial_options* opts,
                                        const double* p, size_t count, double width, klayer_p_limit_row* rows);

#ifdef __cplusplus
}
#endif

#endif
