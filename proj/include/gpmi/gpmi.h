#ifndef GPMI_GPMI_H
#define GPMI_GPMI_H

#include <stddef.h>
#include <stdint.h>

#if defined(GPMI_BUILDING_LIBRARY)
#define GPMI_API __attribute__((visibility("default")))
#else
#define GPMI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible call. */
typedef enum gpmi_status {
    GPMI_OK = 0,
    GPMI_ERR_INVALID_ARG = 1,
    GPMI_ERR_IO = 2,
    GPMI_ERR_PARSE = 3,
    GPMI_ERR_MESH = 4,
    GPMI_ERR_NUMERIC = 5,
    GPMI_ERR_CONVERGENCE = 6,
    GPMI_ERR_STALE_CACHE = 7,
    GPMI_ERR_INTERNAL = 99
} gpmi_status;

typedef struct gpmi_mesh gpmi_mesh;
typedef struct gpmi_basis gpmi_basis;
typedef struct gpmi_obs gpmi_obs;
typedef struct gpmi_model gpmi_model;
typedef struct gpmi_gradient gpmi_gradient;
typedef struct gpmi_cv gpmi_cv;
typedef struct gpmi_truth gpmi_truth;
typedef struct gpmi_study gpmi_study;

/* Message of the last failed call on the calling thread ("" if none). */
GPMI_API const char* gpmi_last_error(void);
/* Short lower-case name of a status code, e.g. "invalid_argument". */
GPMI_API const char* gpmi_status_name(int status);
GPMI_API const char* gpmi_version(void);

/* Worker threads used internally. Results do not depend on this. */
GPMI_API int gpmi_set_num_threads(int threads);
GPMI_API int gpmi_num_threads(void);

/* Content hash (hex) of a file. `buffer` receives a NUL-terminated string. */
GPMI_API int gpmi_file_hash(const char* path, char* buffer, size_t size);

/* ---- meshes ------------------------------------------------------------ */

/* Reads OFF or ASCII PLY (chosen by extension) and validates it. */
GPMI_API int gpmi_mesh_load(const char* path, gpmi_mesh** out);
/* Writes OFF or ASCII PLY, chosen by extension. */
GPMI_API int gpmi_mesh_save(const gpmi_mesh* mesh, const char* path);
/* vertices: 3 doubles per vertex (mm); faces: 3 indices per face. */
GPMI_API int gpmi_mesh_create(size_t num_vertices, const double* vertices, size_t num_faces, const int* faces,
                              gpmi_mesh** out);
/* Flat disc in the z = 0 plane with roughly uniform edge length. */
GPMI_API int gpmi_mesh_create_disc(double radius, double edge, gpmi_mesh** out);
/* Regular nx by ny vertex grid over [0, width] x [0, height]. */
GPMI_API int gpmi_mesh_create_grid(int nx, int ny, double width, double height, gpmi_mesh** out);
/* Subdivided icosahedron with circular holes. directions: 3 doubles per
   hole; angles: polar half-angle of each hole in radians. */
GPMI_API int gpmi_mesh_create_sphere(double radius, int levels, int num_holes, const double* directions,
                                     const double* angles, gpmi_mesh** out);
GPMI_API void gpmi_mesh_free(gpmi_mesh* mesh);
GPMI_API size_t gpmi_mesh_num_vertices(const gpmi_mesh* mesh);
GPMI_API size_t gpmi_mesh_num_faces(const gpmi_mesh* mesh);
GPMI_API int gpmi_mesh_num_boundary_loops(const gpmi_mesh* mesh, int* out);
GPMI_API void gpmi_mesh_vertices(const gpmi_mesh* mesh, double* out);
GPMI_API void gpmi_mesh_faces(const gpmi_mesh* mesh, int* out);
GPMI_API double gpmi_mesh_mean_edge_length(const gpmi_mesh* mesh);
/* Valid while the handle lives. */
GPMI_API const char* gpmi_mesh_hash(const gpmi_mesh* mesh);

/* ---- spectral basis ---------------------------------------------------- */

GPMI_API int gpmi_basis_compute(const gpmi_mesh* mesh, int num_basis, int extend_layers, gpmi_basis** out);
/* Reuses the basis stored in `dir` when it matches mesh, size and layers;
   otherwise computes and stores it. `reused` may be NULL. */
GPMI_API int gpmi_basis_cached(const gpmi_mesh* mesh, int num_basis, int extend_layers, const char* dir,
                               int* reused, gpmi_basis** out);
GPMI_API int gpmi_basis_load(const char* dir, gpmi_basis** out);
GPMI_API int gpmi_basis_save(const gpmi_basis* basis, const char* dir);
/* The first m functions of a basis. */
GPMI_API int gpmi_basis_truncate(const gpmi_basis* basis, int m, gpmi_basis** out);
GPMI_API void gpmi_basis_free(gpmi_basis* basis);
GPMI_API int gpmi_basis_size(const gpmi_basis* basis);
GPMI_API int gpmi_basis_extend_layers(const gpmi_basis* basis);
GPMI_API double gpmi_basis_max_residual(const gpmi_basis* basis);
/* Eigenvalues (mm^-2), ascending. `out` holds gpmi_basis_size() values. */
GPMI_API void gpmi_basis_eigenvalues(const gpmi_basis* basis, double* out);
/* Copy of the mesh the basis was built on. */
GPMI_API int gpmi_basis_mesh(const gpmi_basis* basis, gpmi_mesh** out);

/* ---- observations ------------------------------------------------------ */

/* sigma may be NULL, meaning noise-free observations. */
GPMI_API int gpmi_obs_create(size_t n, const int* vertex, const double* value, const double* sigma, gpmi_obs** out);
/* CSV with columns vertex_id, lat_ms and optionally sigma_ms. */
GPMI_API int gpmi_obs_load_csv(const char* path, gpmi_obs** out);
GPMI_API int gpmi_obs_save_csv(const gpmi_obs* obs, const char* path);
GPMI_API void gpmi_obs_free(gpmi_obs* obs);
GPMI_API size_t gpmi_obs_size(const gpmi_obs* obs);
/* Any output pointer may be NULL. */
GPMI_API void gpmi_obs_get(const gpmi_obs* obs, int* vertex, double* value, double* sigma);

/* ---- regression -------------------------------------------------------- */

/* Smoothness codes: 1 = 1/2, 3 = 3/2, 5 = 5/2. */
typedef struct gpmi_hyperparams {
    int nu;
    double lengthscale;
    double tau2;
    double eta;
} gpmi_hyperparams;

typedef struct gpmi_fit_options {
    int nu;
    int starts;
    uint64_t seed;
    double jitter;
    /* Zero bounds on the length-scale are derived from the mesh. */
    double lengthscale_min;
    double lengthscale_max;
    double tau2_min;
    double tau2_max;
    double eta_min;
    double eta_max;
    int max_evaluations;
} gpmi_fit_options;

GPMI_API void gpmi_fit_options_default(gpmi_fit_options* options);

GPMI_API int gpmi_model_fit(const gpmi_basis* basis, const gpmi_obs* obs, const gpmi_fit_options* options,
                            gpmi_model** out);
GPMI_API int gpmi_model_create(const gpmi_basis* basis, const gpmi_obs* obs, const gpmi_hyperparams* hp,
                               double jitter, gpmi_model** out);
/* Writes hyperparameters, standardization, observations and fit
   diagnostics as JSON. `basis_dir` is recorded so the model can be reloaded. */
GPMI_API int gpmi_model_save(const gpmi_model* model, const char* basis_dir, const char* path);
/* Reloads a model and its basis; fails with GPMI_ERR_STALE_CACHE when the
   basis no longer matches. */
GPMI_API int gpmi_model_load(const char* path, gpmi_model** out);
GPMI_API void gpmi_model_free(gpmi_model* model);
GPMI_API void gpmi_model_hyperparams(const gpmi_model* model, gpmi_hyperparams* out);
GPMI_API double gpmi_model_log_likelihood(const gpmi_model* model);
/* Copy of the mesh the model's basis was built on. */
GPMI_API int gpmi_model_mesh(const gpmi_model* model, gpmi_mesh** out);
/* Posterior mean (ms) and variance (ms^2) at `n` vertices, or at every
   vertex when `vertices` is NULL (then n is ignored). Either output may be NULL. */
GPMI_API int gpmi_model_predict_vertices(const gpmi_model* model, size_t n, const int* vertices, double* mean,
                                         double* variance);
GPMI_API int gpmi_model_predict_centroids(const gpmi_model* model, size_t n, const int* faces, double* mean,
                                          double* variance);
/* CSV (point_id, kind, mean_ms, sd_ms) over all vertices then all centroids,
   plus an optional VTK file. */
GPMI_API int gpmi_model_write_prediction(const gpmi_model* model, const char* csv_path, const char* vtk_path);
/* Cumulative explained variance (%) for 1..M functions. */
GPMI_API void gpmi_model_explained_variance(const gpmi_model* model, double* out);

/* ---- gradients and conduction velocity ---------------------------------- */

/* Posterior of the LAT gradient at face centroids (all faces when `faces` is NULL). */
GPMI_API int gpmi_model_gradient(const gpmi_model* model, size_t n, const int* faces, gpmi_gradient** out);
GPMI_API void gpmi_gradient_free(gpmi_gradient* gradient);
GPMI_API size_t gpmi_gradient_size(const gpmi_gradient* gradient);
/* mean: 3 per face (ms/mm); cov: 9 per face, row-major. Outputs may be NULL. */
GPMI_API void gpmi_gradient_get(const gpmi_gradient* gradient, int* faces, double* mean, double* cov);

GPMI_API int gpmi_cv_sample(const gpmi_gradient* gradient, int samples, uint64_t seed, gpmi_cv** out);
GPMI_API void gpmi_cv_free(gpmi_cv* cv);
GPMI_API size_t gpmi_cv_size(const gpmi_cv* cv);
/* Per face: |mean gradient|, SD of sampled magnitudes, CV IQR, and 5
   percentiles (ranks 9, 25, 50, 75, 91) of magnitude and CV. Outputs may be NULL. */
GPMI_API void gpmi_cv_get(const gpmi_cv* cv, int* faces, double* grad_mean, double* grad_sd, double* grad_pct,
                          double* cv_pct, double* cv_iqr);
GPMI_API int gpmi_cv_save_csv(const gpmi_cv* cv, const char* path);
GPMI_API int gpmi_cv_save_vtk(const gpmi_cv* cv, const gpmi_mesh* mesh, const char* path);

/* ---- virtual patient --------------------------------------------------- */

typedef struct gpmi_truth_options {
    double speed_lengthscale;
    double min_speed;
    double max_speed;
    uint64_t speed_seed;
    /* Faces where wave-method CV is computed; 0 means every face. */
    int wave_sites;
    int wave_k;
    int designs;
    uint64_t site_seed;
    double exact_radius;
} gpmi_truth_options;

GPMI_API void gpmi_truth_options_default(gpmi_truth_options* options);
/* Speed field from the basis prior, eikonal LAT from the source vertices,
   and element and wave CV. */
GPMI_API int gpmi_truth_simulate(const gpmi_basis* basis, size_t num_sources, const int* sources,
                                 const gpmi_truth_options* options, gpmi_truth** out);
GPMI_API int gpmi_truth_save(const gpmi_truth* truth, const char* dir);
GPMI_API int gpmi_truth_load(const char* dir, gpmi_truth** out);
GPMI_API void gpmi_truth_free(gpmi_truth* truth);
GPMI_API size_t gpmi_truth_num_vertices(const gpmi_truth* truth);
GPMI_API void gpmi_truth_lat(const gpmi_truth* truth, double* out);
GPMI_API void gpmi_truth_speed(const gpmi_truth* truth, double* out);

/* mode: "random" or "maximin". */
GPMI_API int gpmi_truth_sample_obs(const gpmi_truth* truth, int n, double noise_sd, const char* mode, uint64_t seed,
                                   int designs, gpmi_obs** out);

/* Scores a prediction CSV against a truth directory and writes a JSON
   report. quantity "lat" reads predict output; "gradmag" reads cv output. */
GPMI_API int gpmi_validate(const char* prediction_csv, const char* truth_dir, const char* quantity,
                           const char* report_path);

/* ---- accuracy study ---------------------------------------------------- */

typedef struct gpmi_study_options {
    int repeats;
    double noise_sd;
    int fit_basis;
    int wave_sites;
    int designs;
    int samples;
    int wave_k;
    uint64_t seed;
    double speed_lengthscale;
    double min_speed;
    double max_speed;
    double exact_radius;
    int starts;
} gpmi_study_options;

typedef void (*gpmi_progress_fn)(const char* message, void* user);

GPMI_API void gpmi_study_options_default(gpmi_study_options* options);
/* Repeated random designs per observation count on an eikonal virtual
   patient built from the basis. Sources NULL means vertex 0. */
GPMI_API int gpmi_study_run(const gpmi_basis* basis, size_t num_counts, const int* counts, size_t num_sources,
                            const int* sources, const gpmi_study_options* options, gpmi_progress_fn progress,
                            void* user, gpmi_study** out);
GPMI_API void gpmi_study_free(gpmi_study* study);
GPMI_API size_t gpmi_study_num_rows(const gpmi_study* study);
/* Row r: n, then lat_nrmse, lat_coverage, wave_nrmse, wave_coverage,
   element_nrmse, element_coverage, spearman, mean_lengthscale (9 values). */
GPMI_API void gpmi_study_row(const gpmi_study* study, size_t r, double* out);
/* Explained variance (%) at the fitting basis size from a full-basis fit. */
GPMI_API double gpmi_study_explained_variance(const gpmi_study* study);
GPMI_API int gpmi_study_save_csv(const gpmi_study* study, const char* path);

#ifdef __cplusplus
}
#endif

#endif
