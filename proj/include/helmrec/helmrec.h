/* helmrec C API: opaque handles, status codes, thread-local error text.
 *
 * Every function returning hr_status leaves its out-parameters untouched on
 * failure; hr_last_error() then describes the failure as "module/stage: text".
 * Handles are freed with the matching hr_*_free (NULL is accepted).
 */
#ifndef HELMREC_H
#define HELMREC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  HR_OK = 0,
  HR_E_VALIDATION = 2,
  HR_E_NUMERICAL = 3,
  HR_E_DOMAIN = 4,
  HR_E_IO = 5,
  HR_E_INTERNAL = 9
} hr_status;

const char* hr_last_error(void);
const char* hr_version(void);

/* ---- scenes ---- */

typedef struct hr_scene hr_scene;

/* Reads the scene JSON format; a potential is solved and attached. */
hr_status hr_scene_load(const char* path, hr_scene** out);
hr_status hr_scene_parse(const char* json, hr_scene** out);
void hr_scene_free(hr_scene* scene);
/* Replaces κ (re-solves the scattering problem when a potential is present). */
hr_status hr_scene_set_kappa(hr_scene* scene, double kappa);
hr_status hr_scene_info(const hr_scene* scene, double* kappa, double* obstacle_radius, int* has_potential);
hr_status hr_scene_eval(const hr_scene* scene, const double x[3], double* re, double* im);

/* ---- ray recovery ---- */

#define HR_MAX_LADDER 32

typedef struct {
  double tau;
  int depth;
  int extrapolation_order;
  int precision_digits;
  int ladder_len;
  double ladder[HR_MAX_LADDER];
} hr_recover_params;

hr_status hr_recover_params_default(double kappa, int depth, hr_recover_params* out);

typedef struct hr_recovery hr_recovery;

hr_status hr_recover_ray(const hr_scene* scene, const double origin[3], const double dir[3],
                         const hr_recover_params* params, hr_recovery** out);
/* Writes the `s, im_psi` samples recover_ray would read, in 50 digits. */
hr_status hr_samples_write(const hr_scene* scene, const double origin[3], const double dir[3],
                           const hr_recover_params* params, const char* csv_path);
/* Recovery from a sample file; s_min is the radius beyond which samples are valid. */
hr_status hr_recover_ray_samples(const char* csv_path, double kappa, double s_min, const double origin[3],
                                 const double dir[3], const hr_recover_params* params, hr_recovery** out);
int hr_recovery_depth(const hr_recovery* rec);
hr_status hr_recovery_coeff(const hr_recovery* rec, int j, double* re, double* im);
hr_status hr_recovery_eval(const hr_recovery* rec, double s, double* re, double* im, double* error_estimate);
hr_status hr_recovery_write_json(const hr_recovery* rec, const char* path);
void hr_recovery_free(hr_recovery* rec);

/* ---- planes ---- */

typedef struct {
  double base[3];
  double normal[3]; /* outward normal of V_X; the obstacle lies on its side */
  double half_extent;
  double spacing;
} hr_plane_spec;

typedef struct hr_plane hr_plane;

hr_status hr_plane_sample(const hr_scene* scene, const hr_plane_spec* spec, hr_plane** out);
hr_status hr_plane_recover(const hr_scene* scene, const hr_plane_spec* spec, const hr_recover_params* params,
                           double guard, hr_plane** out);
hr_status hr_plane_load(const char* csv_path, const char* header_path, hr_plane** out);
hr_status hr_plane_info(const hr_plane* plane, int* nodes_per_side, int* flagged, int* rays, double* cancellation_digits);
/* Max relative error against the scene over unflagged nodes. */
hr_status hr_plane_max_error(const hr_plane* plane, const hr_scene* scene, double* max_rel);
hr_status hr_plane_write(const hr_plane* plane, const char* csv_path, const char* header_path);
hr_status hr_plane_continue(const hr_plane* plane, double kappa, const double x[3], double tolerance, double* re,
                            double* im, double* truncation_estimate, int* aperture_warning);
void hr_plane_free(hr_plane* plane);

/* ---- scattering ---- */

/* A(θ,θ') for all pairs of `count` Fibonacci directions, written as the
 * far-field CSV. Requires a potential. */
hr_status hr_farfield_write(const hr_scene* scene, int count, const char* csv_path);
/* max relative asymmetry of R⁺_v over `pairs` random exterior point pairs. */
hr_status hr_reciprocity(const hr_scene* scene, int pairs, unsigned seed, double asymmetry, double* out);

typedef struct {
  double plane_base[3];
  double plane_normal[3];
  double patch_radius;
  double patch_spacing;
  int equatorial_directions;
  int hemisphere_directions;
  int multipole_degree;
  double band;
  double inversion_spacing;
  double tikhonov;
  int real_potential;
} hr_pipeline_params;

typedef struct hr_pipeline hr_pipeline;

hr_status hr_pipeline_params_default(double kappa, const double base[3], const double normal[3],
                                     hr_pipeline_params* out);
hr_status hr_pipeline_run(const hr_scene* scene, const hr_pipeline_params* params, hr_pipeline** out);
/* Relative L² error against the scene's potential, band-limited. */
hr_status hr_pipeline_error(const hr_pipeline* run, const hr_scene* truth, double* rel_l2);
hr_status hr_pipeline_stage(const hr_pipeline* run, int index, const char** name, double* error_estimate);
hr_status hr_pipeline_born(const hr_pipeline* run, double* born_norm, int* warning);
/* Any path may be NULL. */
hr_status hr_pipeline_write(const hr_pipeline* run, const char* potential_json, const char* farfield_csv,
                            const char* report_json, double bandlimited_error);
void hr_pipeline_free(hr_pipeline* run);

/* ---- diagnostics ---- */

/* max |Im G⁺(r d)| over `directions` Fibonacci directions, r = factor·π/κ. */
hr_status hr_sphere_null(double kappa, double radius_factor, int directions, double* max_im);
/* Leading-coefficient two-point estimate from J = s·Im ψ at radii s and s+τ. */
hr_status hr_two_point_estimate(double j_x, double j_y, double s, double tau, double kappa, double* re, double* im);
/* One CSV <dir>/<name>.csv with a header row; rows × cols values, row-major. */
hr_status hr_emit_series(const char* dir, const char* name, const char* const* columns, size_t cols,
                         const double* values, size_t rows);

#ifdef __cplusplus
}
#endif

#endif
