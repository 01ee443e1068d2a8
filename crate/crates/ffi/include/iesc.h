#ifndef IESC_H
#define IESC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IescStatus {
  IESC_STATUS_OK = 0,
  IESC_STATUS_NULL_POINTER = 1,
  IESC_STATUS_INVALID_ARGUMENT = 2,
  IESC_STATUS_DEGENERATE_OFFSET = 3,
  IESC_STATUS_SINGULARITY = 4,
  IESC_STATUS_CAPACITY = 5,
  /**
   * The run diverged; its partial history is still returned.
   */
  IESC_STATUS_DIVERGENCE = 6,
  IESC_STATUS_INVALID_STATE = 7,
  IESC_STATUS_CONFIG = 8,
  IESC_STATUS_IO = 9,
  IESC_STATUS_PANIC = 10,
} IescStatus;

typedef enum IescSourceKind {
  IESC_SOURCE_KIND_PLANE_WAVE = 0,
  IESC_SOURCE_KIND_GAUSSIAN_BEAM = 1,
} IescSourceKind;

/**
 * A surface discretization.
 */
typedef struct IescMesh IescMesh;

/**
 * Result of a solver run.
 */
typedef struct IescRun IescRun;

/**
 * Solver settings; start from [`iesc_solver_options_default`].
 */
typedef struct IescSolverOptions {
  uint32_t max_iters;
  double tol;
  double relaxation;
  double offset;
  /**
   * Non-zero enables the degree taper of the corrections.
   */
  int band_limit;
  double band_pass;
  double band_stop;
  /**
   * Non-zero selects fixed-order summation.
   */
  int deterministic;
} IescSolverOptions;

/**
 * Incident field. `focus` is used by the Gaussian beam only.
 */
typedef struct IescSource {
  enum IescSourceKind kind;
  double amplitude;
  double direction[3];
  double polarization[3];
  double waist;
  double focus[3];
} IescSource;

typedef struct IescIterationRecord {
  uint32_t iteration;
  double max_abs_dj[3];
  double max_abs_dm[3];
  double l2_dj;
  double l2_dm;
  double relative_metric;
  double wall_seconds;
} IescIterationRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. Valid until
 * the next failing call on the same thread.
 */
const char *iesc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *iesc_version(void);

/**
 * Sphere of `radius` wavelengths sampled at `density` nodes per wavelength.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IescStatus iesc_sphere_mesh_new(double radius, double density, struct IescMesh **out);

/**
 * # Safety
 * `mesh` must come from [`iesc_sphere_mesh_new`] and not be used afterwards.
 */
void iesc_mesh_free(struct IescMesh *mesh);

/**
 * Number of nodes; zero for a null handle.
 *
 * # Safety
 * `mesh` must be null or a live handle.
 */
size_t iesc_mesh_len(const struct IescMesh *mesh);

/**
 * # Safety
 * `mesh` must be a live handle; `n_theta` and `n_phi` valid for writes.
 */
enum IescStatus iesc_mesh_grid_shape(const struct IescMesh *mesh, size_t *n_theta, size_t *n_phi);

/**
 * Node positions as `3 * len` doubles.
 *
 * # Safety
 * `mesh` must be a live handle and `xyz` valid for `3 * len` writes.
 */
enum IescStatus iesc_mesh_nodes(const struct IescMesh *mesh, double *xyz, size_t len);

struct IescSolverOptions iesc_solver_options_default(void);

/**
 * Iterate the surface currents on `mesh` for a body of relative
 * permittivity `eps_re + j eps_im` in vacuum.
 *
 * On success and on [`IescStatus::Divergence`] a run handle is written to
 * `out`; after divergence it carries the partial history and no currents.
 *
 * # Safety
 * `mesh` must be a live handle, `src` and `opts` valid reads, `out` a valid
 * write.
 */
enum IescStatus iesc_run_new(const struct IescMesh *mesh,
                             const struct IescSource *src,
                             double eps_re,
                             double eps_im,
                             const struct IescSolverOptions *opts,
                             struct IescRun **out);

/**
 * # Safety
 * `run` must come from [`iesc_run_new`] and not be used afterwards.
 */
void iesc_run_free(struct IescRun *run);

/**
 * # Safety
 * `run` must be null or a live handle.
 */
size_t iesc_run_iterations(const struct IescRun *run);

/**
 * 1 if the run met its tolerance, 0 otherwise.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
int iesc_run_converged(const struct IescRun *run);

/**
 * Statistics of pass `index` (0-based).
 *
 * # Safety
 * `run` must be a live handle and `out` valid for writes.
 */
enum IescStatus iesc_run_record(const struct IescRun *run,
                                size_t index,
                                struct IescIterationRecord *out);

/**
 * Final currents as `6 * len` doubles each, ordered
 * `(x.re, x.im, y.re, y.im, z.re, z.im)` per node.
 *
 * # Safety
 * `run` must be a live handle; `j` and `m` valid for `6 * len` writes.
 */
enum IescStatus iesc_run_currents(const struct IescRun *run, double *j, double *m, size_t len);

/**
 * Mie amplitudes `S₁, S₂` of a sphere at `n` angles (radians), written as
 * `(re, im)` pairs.
 *
 * # Safety
 * `theta` valid for `n` reads; `s1` and `s2` for `2n` writes.
 */
enum IescStatus iesc_mie_amplitudes(double radius,
                                    double eps,
                                    const double *theta,
                                    size_t n,
                                    double *s1,
                                    double *s2);

/**
 * Extinction and scattering efficiencies of a sphere.
 *
 * # Safety
 * `q_ext` and `q_sca` must be valid for writes.
 */
enum IescStatus iesc_mie_efficiencies(double radius, double eps, double *q_ext, double *q_sca);

/**
 * Run the experiment described by a config file. `out_dir` may be null to
 * use the directory named in the file.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `out_dir` null or one.
 */
enum IescStatus iesc_run_config(const char *config_path, const char *out_dir, int deterministic);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IESC_H */
