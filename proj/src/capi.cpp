#include <gpmi/gpmi.h>

#include <gpmi/basis_cache.hpp>
#include <gpmi/error.hpp>
#include <gpmi/io.hpp>
#include <gpmi/mesh_io.hpp>
#include <gpmi/parallel.hpp>
#include <gpmi/pipeline.hpp>
#include <gpmi/shapes.hpp>
#include <gpmi/study.hpp>

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

struct gpmi_mesh
{
    gpmi::TriMesh mesh;
    std::string hash;
};

struct gpmi_basis
{
    std::shared_ptr<const gpmi::EigenBasis> basis;
};

struct gpmi_obs
{
    gpmi::Observations obs;
};

struct gpmi_model
{
    gpmi::GpModel model;
};

struct gpmi_gradient
{
    gpmi::GradientPosterior grad;
};

struct gpmi_cv
{
    gpmi::CvSummary cv;
};

struct gpmi_truth
{
    gpmi::TruthBundle bundle;
};

struct gpmi_study
{
    gpmi::StudyResult result;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
int guarded(F&& body)
{
    try {
        body();
        g_last_error.clear();
        return GPMI_OK;
    } catch (const gpmi::Error& e) {
        g_last_error = e.what();
        return static_cast<int>(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return GPMI_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return GPMI_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what)
{
    if (p == nullptr) gpmi::fail(gpmi::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

gpmi::Smoothness smoothness_of(int code)
{
    switch (code) {
    case 1: return gpmi::Smoothness::Half;
    case 3: return gpmi::Smoothness::ThreeHalves;
    case 5: return gpmi::Smoothness::FiveHalves;
    }
    gpmi::fail(gpmi::ErrorCode::InvalidArgument, "smoothness code must be 1, 3 or 5 (got " + std::to_string(code) + ")");
}

int smoothness_code(gpmi::Smoothness nu)
{
    switch (nu) {
    case gpmi::Smoothness::Half: return 1;
    case gpmi::Smoothness::ThreeHalves: return 3;
    case gpmi::Smoothness::FiveHalves: return 5;
    }
    return 3;
}

gpmi_mesh* wrap(gpmi::TriMesh mesh)
{
    auto* m = new gpmi_mesh{std::move(mesh), {}};
    m->hash = gpmi::mesh_hash(m->mesh);
    return m;
}

std::vector<int> index_list(size_t n, const int* idx)
{
    return std::vector<int>(idx, idx + n);
}

void copy_field(const gpmi::PosteriorField& f, double* mean, double* variance)
{
    if (mean) std::memcpy(mean, f.mean.data(), sizeof(double) * static_cast<size_t>(f.mean.size()));
    if (variance) std::memcpy(variance, f.variance.data(), sizeof(double) * static_cast<size_t>(f.variance.size()));
}

} // namespace

extern "C" {

const char* gpmi_last_error(void)
{
    return g_last_error.c_str();
}

const char* gpmi_status_name(int status)
{
    if (status == GPMI_OK) return "ok";
    switch (status) {
    case GPMI_ERR_INVALID_ARG:
    case GPMI_ERR_IO:
    case GPMI_ERR_PARSE:
    case GPMI_ERR_MESH:
    case GPMI_ERR_NUMERIC:
    case GPMI_ERR_CONVERGENCE:
    case GPMI_ERR_STALE_CACHE:
    case GPMI_ERR_INTERNAL: return gpmi::to_string(static_cast<gpmi::ErrorCode>(status));
    }
    return "unknown";
}

const char* gpmi_version(void)
{
    return "0.1.0";
}

int gpmi_set_num_threads(int threads)
{
    return guarded([&] {
        gpmi::require(threads >= 1, gpmi::ErrorCode::InvalidArgument, "thread count must be >= 1");
        gpmi::set_num_threads(threads);
    });
}

int gpmi_num_threads(void)
{
    return gpmi::num_threads();
}

int gpmi_file_hash(const char* path, char* buffer, size_t size)
{
    return guarded([&] {
        need(path, "path");
        need(buffer, "buffer");
        const std::string h = gpmi::io::file_hash(path);
        gpmi::require(size > h.size(), gpmi::ErrorCode::InvalidArgument, "hash buffer too small");
        std::memcpy(buffer, h.c_str(), h.size() + 1);
    });
}

/* meshes */

int gpmi_mesh_load(const char* path, gpmi_mesh** out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = wrap(gpmi::load_mesh(path));
    });
}

int gpmi_mesh_save(const gpmi_mesh* mesh, const char* path)
{
    return guarded([&] {
        need(mesh, "mesh");
        need(path, "path");
        gpmi::save_mesh(mesh->mesh, path);
    });
}

int gpmi_mesh_create(size_t num_vertices, const double* vertices, size_t num_faces, const int* faces, gpmi_mesh** out)
{
    return guarded([&] {
        need(vertices, "vertices");
        need(faces, "faces");
        need(out, "out");
        gpmi::TriMesh m;
        for (size_t v = 0; v < num_vertices; ++v) m.vertices.emplace_back(vertices[3 * v], vertices[3 * v + 1], vertices[3 * v + 2]);
        for (size_t f = 0; f < num_faces; ++f) m.faces.push_back({faces[3 * f], faces[3 * f + 1], faces[3 * f + 2]});
        gpmi::validate(m);
        *out = wrap(std::move(m));
    });
}

int gpmi_mesh_create_disc(double radius, double edge, gpmi_mesh** out)
{
    return guarded([&] {
        need(out, "out");
        *out = wrap(gpmi::shapes::disc(radius, edge));
    });
}

int gpmi_mesh_create_grid(int nx, int ny, double width, double height, gpmi_mesh** out)
{
    return guarded([&] {
        need(out, "out");
        *out = wrap(gpmi::shapes::grid(nx, ny, width, height));
    });
}

int gpmi_mesh_create_sphere(double radius, int levels, int num_holes, const double* directions, const double* angles,
                            gpmi_mesh** out)
{
    return guarded([&] {
        need(out, "out");
        gpmi::require(num_holes >= 0, gpmi::ErrorCode::InvalidArgument, "hole count must be >= 0");
        if (num_holes > 0) {
            need(directions, "directions");
            need(angles, "angles");
        }
        std::vector<gpmi::shapes::Hole> holes;
        for (int h = 0; h < num_holes; ++h) {
            holes.push_back({gpmi::Vec3(directions[3 * h], directions[3 * h + 1], directions[3 * h + 2]), angles[h]});
        }
        *out = wrap(gpmi::shapes::sphere_with_holes(radius, levels, holes));
    });
}

void gpmi_mesh_free(gpmi_mesh* mesh)
{
    delete mesh;
}

size_t gpmi_mesh_num_vertices(const gpmi_mesh* mesh)
{
    return mesh ? mesh->mesh.num_vertices() : 0;
}

size_t gpmi_mesh_num_faces(const gpmi_mesh* mesh)
{
    return mesh ? mesh->mesh.num_faces() : 0;
}

int gpmi_mesh_num_boundary_loops(const gpmi_mesh* mesh, int* out)
{
    return guarded([&] {
        need(mesh, "mesh");
        need(out, "out");
        *out = static_cast<int>(gpmi::boundary_loops(mesh->mesh).size());
    });
}

void gpmi_mesh_vertices(const gpmi_mesh* mesh, double* out)
{
    if (!mesh || !out) return;
    for (size_t v = 0; v < mesh->mesh.num_vertices(); ++v) {
        for (int d = 0; d < 3; ++d) out[3 * v + d] = mesh->mesh.vertices[v][d];
    }
}

void gpmi_mesh_faces(const gpmi_mesh* mesh, int* out)
{
    if (!mesh || !out) return;
    for (size_t f = 0; f < mesh->mesh.num_faces(); ++f) {
        for (int d = 0; d < 3; ++d) out[3 * f + d] = mesh->mesh.faces[f][d];
    }
}

double gpmi_mesh_mean_edge_length(const gpmi_mesh* mesh)
{
    return mesh ? gpmi::mean_edge_length(mesh->mesh) : 0.0;
}

const char* gpmi_mesh_hash(const gpmi_mesh* mesh)
{
    return mesh ? mesh->hash.c_str() : "";
}

/* spectral basis */

int gpmi_basis_compute(const gpmi_mesh* mesh, int num_basis, int extend_layers, gpmi_basis** out)
{
    return guarded([&] {
        need(mesh, "mesh");
        need(out, "out");
        gpmi::BasisOptions o;
        o.num_basis = num_basis;
        o.extend_layers = extend_layers;
        *out = new gpmi_basis{std::make_shared<const gpmi::EigenBasis>(gpmi::compute_basis(mesh->mesh, o))};
    });
}

int gpmi_basis_cached(const gpmi_mesh* mesh, int num_basis, int extend_layers, const char* dir, int* reused,
                      gpmi_basis** out)
{
    return guarded([&] {
        need(mesh, "mesh");
        need(dir, "dir");
        need(out, "out");
        gpmi::BasisOptions o;
        o.num_basis = num_basis;
        o.extend_layers = extend_layers;
        bool r = false;
        *out = new gpmi_basis{std::make_shared<const gpmi::EigenBasis>(gpmi::cached_basis(mesh->mesh, o, dir, &r))};
        if (reused) *reused = r ? 1 : 0;
    });
}

int gpmi_basis_load(const char* dir, gpmi_basis** out)
{
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        *out = new gpmi_basis{std::make_shared<const gpmi::EigenBasis>(gpmi::load_basis(dir))};
    });
}

int gpmi_basis_save(const gpmi_basis* basis, const char* dir)
{
    return guarded([&] {
        need(basis, "basis");
        need(dir, "dir");
        gpmi::save_basis(*basis->basis, dir);
    });
}

int gpmi_basis_truncate(const gpmi_basis* basis, int m, gpmi_basis** out)
{
    return guarded([&] {
        need(basis, "basis");
        need(out, "out");
        *out = new gpmi_basis{std::make_shared<const gpmi::EigenBasis>(gpmi::truncate(*basis->basis, m))};
    });
}

void gpmi_basis_free(gpmi_basis* basis)
{
    delete basis;
}

int gpmi_basis_size(const gpmi_basis* basis)
{
    return basis ? basis->basis->size() : 0;
}

int gpmi_basis_extend_layers(const gpmi_basis* basis)
{
    return basis ? basis->basis->extend_layers : 0;
}

double gpmi_basis_max_residual(const gpmi_basis* basis)
{
    return basis ? basis->basis->max_residual : 0.0;
}

void gpmi_basis_eigenvalues(const gpmi_basis* basis, double* out)
{
    if (!basis || !out) return;
    const auto& l = basis->basis->lambdas;
    std::memcpy(out, l.data(), sizeof(double) * static_cast<size_t>(l.size()));
}

int gpmi_basis_mesh(const gpmi_basis* basis, gpmi_mesh** out)
{
    return guarded([&] {
        need(basis, "basis");
        need(out, "out");
        *out = new gpmi_mesh{basis->basis->mesh, basis->basis->mesh_hash};
    });
}

/* observations */

int gpmi_obs_create(size_t n, const int* vertex, const double* value, const double* sigma, gpmi_obs** out)
{
    return guarded([&] {
        need(vertex, "vertex");
        need(value, "value");
        need(out, "out");
        gpmi::Observations o;
        o.vertex.assign(vertex, vertex + n);
        o.value.assign(value, value + n);
        o.sigma = sigma ? std::vector<double>(sigma, sigma + n) : std::vector<double>(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            gpmi::require(std::isfinite(o.value[i]), gpmi::ErrorCode::InvalidArgument, "observation values must be finite");
            gpmi::require(std::isfinite(o.sigma[i]) && o.sigma[i] >= 0, gpmi::ErrorCode::InvalidArgument,
                          "observation sigma must be finite and >= 0");
        }
        *out = new gpmi_obs{std::move(o)};
    });
}

int gpmi_obs_load_csv(const char* path, gpmi_obs** out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new gpmi_obs{gpmi::read_observations_csv(path)};
    });
}

int gpmi_obs_save_csv(const gpmi_obs* obs, const char* path)
{
    return guarded([&] {
        need(obs, "obs");
        need(path, "path");
        gpmi::io::write_file_atomic(path, gpmi::format_observations_csv(obs->obs));
    });
}

void gpmi_obs_free(gpmi_obs* obs)
{
    delete obs;
}

size_t gpmi_obs_size(const gpmi_obs* obs)
{
    return obs ? obs->obs.size() : 0;
}

void gpmi_obs_get(const gpmi_obs* obs, int* vertex, double* value, double* sigma)
{
    if (!obs) return;
    const auto& o = obs->obs;
    for (size_t i = 0; i < o.size(); ++i) {
        if (vertex) vertex[i] = o.vertex[i];
        if (value) value[i] = o.value[i];
        if (sigma) sigma[i] = o.sigma[i];
    }
}

/* regression */

void gpmi_fit_options_default(gpmi_fit_options* options)
{
    if (!options) return;
    const gpmi::FitConfig c;
    options->nu = smoothness_code(c.nu);
    options->starts = c.starts;
    options->seed = c.seed;
    options->jitter = c.jitter;
    options->lengthscale_min = c.lengthscale_min;
    options->lengthscale_max = c.lengthscale_max;
    options->tau2_min = c.tau2_min;
    options->tau2_max = c.tau2_max;
    options->eta_min = c.eta_min;
    options->eta_max = c.eta_max;
    options->max_evaluations = c.max_evaluations;
}

int gpmi_model_fit(const gpmi_basis* basis, const gpmi_obs* obs, const gpmi_fit_options* options, gpmi_model** out)
{
    return guarded([&] {
        need(basis, "basis");
        need(obs, "obs");
        need(out, "out");
        gpmi::FitConfig c;
        if (options) {
            c.nu = smoothness_of(options->nu);
            c.starts = options->starts;
            c.seed = options->seed;
            c.jitter = options->jitter;
            c.lengthscale_min = options->lengthscale_min;
            c.lengthscale_max = options->lengthscale_max;
            c.tau2_min = options->tau2_min;
            c.tau2_max = options->tau2_max;
            c.eta_min = options->eta_min;
            c.eta_max = options->eta_max;
            c.max_evaluations = options->max_evaluations;
        }
        *out = new gpmi_model{gpmi::fit_hyperparameters(basis->basis, obs->obs, c)};
    });
}

int gpmi_model_create(const gpmi_basis* basis, const gpmi_obs* obs, const gpmi_hyperparams* hp, double jitter,
                      gpmi_model** out)
{
    return guarded([&] {
        need(basis, "basis");
        need(obs, "obs");
        need(hp, "hp");
        need(out, "out");
        gpmi::Hyperparams h;
        h.nu = smoothness_of(hp->nu);
        h.lengthscale = hp->lengthscale;
        h.tau2 = hp->tau2;
        h.eta = hp->eta;
        *out = new gpmi_model{gpmi::GpModel(basis->basis, obs->obs, h, jitter)};
    });
}

int gpmi_model_save(const gpmi_model* model, const char* basis_dir, const char* path)
{
    return guarded([&] {
        need(model, "model");
        need(basis_dir, "basis_dir");
        need(path, "path");
        gpmi::save_model(model->model, basis_dir, path);
    });
}

int gpmi_model_load(const char* path, gpmi_model** out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new gpmi_model{gpmi::load_model(path)};
    });
}

void gpmi_model_free(gpmi_model* model)
{
    delete model;
}

void gpmi_model_hyperparams(const gpmi_model* model, gpmi_hyperparams* out)
{
    if (!model || !out) return;
    const auto& h = model->model.hyperparams();
    out->nu = smoothness_code(h.nu);
    out->lengthscale = h.lengthscale;
    out->tau2 = h.tau2;
    out->eta = h.eta;
}

double gpmi_model_log_likelihood(const gpmi_model* model)
{
    return model ? model->model.log_likelihood() : 0.0;
}

int gpmi_model_mesh(const gpmi_model* model, gpmi_mesh** out)
{
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        *out = new gpmi_mesh{model->model.basis().mesh, model->model.basis().mesh_hash};
    });
}

int gpmi_model_predict_vertices(const gpmi_model* model, size_t n, const int* vertices, double* mean, double* variance)
{
    return guarded([&] {
        need(model, "model");
        copy_field(vertices ? model->model.posterior_vertices(index_list(n, vertices))
                            : model->model.posterior_all_vertices(),
                   mean, variance);
    });
}

int gpmi_model_predict_centroids(const gpmi_model* model, size_t n, const int* faces, double* mean, double* variance)
{
    return guarded([&] {
        need(model, "model");
        copy_field(faces ? model->model.posterior_centroids(index_list(n, faces))
                         : model->model.posterior_all_centroids(),
                   mean, variance);
    });
}

int gpmi_model_write_prediction(const gpmi_model* model, const char* csv_path, const char* vtk_path)
{
    return guarded([&] {
        need(model, "model");
        need(csv_path, "csv_path");
        const gpmi::PosteriorField f = model->model.posterior_all_vertices();
        gpmi::io::write_file_atomic(csv_path,
                                    gpmi::format_prediction_csv(f, model->model.posterior_all_centroids()));
        if (vtk_path) gpmi::save_prediction_vtk(model->model.basis().mesh, f, vtk_path);
    });
}

void gpmi_model_explained_variance(const gpmi_model* model, double* out)
{
    if (!model || !out) return;
    const Eigen::VectorXd ev = gpmi::explained_variance(model->model.basis().lambdas, model->model.hyperparams());
    std::memcpy(out, ev.data(), sizeof(double) * static_cast<size_t>(ev.size()));
}

/* gradients and conduction velocity */

int gpmi_model_gradient(const gpmi_model* model, size_t n, const int* faces, gpmi_gradient** out)
{
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        *out = new gpmi_gradient{faces ? model->model.posterior_gradient(index_list(n, faces))
                                       : model->model.posterior_gradient_all()};
    });
}

void gpmi_gradient_free(gpmi_gradient* gradient)
{
    delete gradient;
}

size_t gpmi_gradient_size(const gpmi_gradient* gradient)
{
    return gradient ? gradient->grad.faces.size() : 0;
}

void gpmi_gradient_get(const gpmi_gradient* gradient, int* faces, double* mean, double* cov)
{
    if (!gradient) return;
    const auto& g = gradient->grad;
    for (size_t i = 0; i < g.faces.size(); ++i) {
        if (faces) faces[i] = g.faces[i];
        for (int a = 0; a < 3; ++a) {
            if (mean) mean[3 * i + a] = g.mean[i][a];
            for (int b = 0; b < 3; ++b) {
                if (cov) cov[9 * i + 3 * a + b] = g.cov[i](a, b);
            }
        }
    }
}

int gpmi_cv_sample(const gpmi_gradient* gradient, int samples, uint64_t seed, gpmi_cv** out)
{
    return guarded([&] {
        need(gradient, "gradient");
        need(out, "out");
        *out = new gpmi_cv{gpmi::sample_cv(gradient->grad, samples, seed)};
    });
}

void gpmi_cv_free(gpmi_cv* cv)
{
    delete cv;
}

size_t gpmi_cv_size(const gpmi_cv* cv)
{
    return cv ? cv->cv.faces.size() : 0;
}

void gpmi_cv_get(const gpmi_cv* cv, int* faces, double* grad_mean, double* grad_sd, double* grad_pct, double* cv_pct,
                 double* cv_iqr)
{
    if (!cv) return;
    const auto& c = cv->cv;
    for (size_t i = 0; i < c.faces.size(); ++i) {
        if (faces) faces[i] = c.faces[i];
        if (grad_mean) grad_mean[i] = c.grad_mean[i];
        if (grad_sd) grad_sd[i] = c.grad_sd[i];
        if (cv_iqr) cv_iqr[i] = c.cv_iqr[i];
        for (int r = 0; r < 5; ++r) {
            if (grad_pct) grad_pct[5 * i + r] = c.grad_pct[i][r];
            if (cv_pct) cv_pct[5 * i + r] = c.cv_pct[i][r];
        }
    }
}

int gpmi_cv_save_csv(const gpmi_cv* cv, const char* path)
{
    return guarded([&] {
        need(cv, "cv");
        need(path, "path");
        gpmi::io::write_file_atomic(path, gpmi::format_cv_csv(cv->cv));
    });
}

int gpmi_cv_save_vtk(const gpmi_cv* cv, const gpmi_mesh* mesh, const char* path)
{
    return guarded([&] {
        need(cv, "cv");
        need(mesh, "mesh");
        need(path, "path");
        gpmi::save_cv_vtk(mesh->mesh, cv->cv, path);
    });
}

/* virtual patient */

void gpmi_truth_options_default(gpmi_truth_options* options)
{
    if (!options) return;
    const gpmi::SpeedParams s;
    const gpmi::StudyConfig c;
    options->speed_lengthscale = s.lengthscale;
    options->min_speed = s.min_speed;
    options->max_speed = s.max_speed;
    options->speed_seed = 0;
    options->wave_sites = c.wave_sites;
    options->wave_k = c.wave_k;
    options->designs = c.designs;
    options->site_seed = 0;
    options->exact_radius = 0.0;
}

int gpmi_truth_simulate(const gpmi_basis* basis, size_t num_sources, const int* sources,
                        const gpmi_truth_options* options, gpmi_truth** out)
{
    return guarded([&] {
        need(basis, "basis");
        need(out, "out");
        gpmi_truth_options o;
        gpmi_truth_options_default(&o);
        if (options) o = *options;
        const gpmi::TriMesh& mesh = basis->basis->mesh;
        gpmi::TruthBundle b;
        b.mesh = mesh;
        b.speed.lengthscale = o.speed_lengthscale;
        b.speed.min_speed = o.min_speed;
        b.speed.max_speed = o.max_speed;
        b.speed.seed = o.speed_seed;
        gpmi::TruthOptions t;
        t.wave_k = o.wave_k;
        t.exact_radius = o.exact_radius;
        if (o.wave_sites > 0) {
            t.wave_all_faces = false;
            t.wave_sites = gpmi::select_wave_sites(mesh, o.wave_sites, o.designs, o.site_seed);
        }
        const std::vector<int> src = (sources && num_sources > 0) ? index_list(num_sources, sources) : std::vector<int>{0};
        b.truth = gpmi::simulate_truth(mesh, gpmi::sample_speed_field(*basis->basis, b.speed), src, t);
        *out = new gpmi_truth{std::move(b)};
    });
}

int gpmi_truth_save(const gpmi_truth* truth, const char* dir)
{
    return guarded([&] {
        need(truth, "truth");
        need(dir, "dir");
        gpmi::save_truth(truth->bundle, dir);
    });
}

int gpmi_truth_load(const char* dir, gpmi_truth** out)
{
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        *out = new gpmi_truth{gpmi::load_truth(dir)};
    });
}

void gpmi_truth_free(gpmi_truth* truth)
{
    delete truth;
}

size_t gpmi_truth_num_vertices(const gpmi_truth* truth)
{
    return truth ? truth->bundle.truth.lat.size() : 0;
}

void gpmi_truth_lat(const gpmi_truth* truth, double* out)
{
    if (!truth || !out) return;
    const auto& l = truth->bundle.truth.lat;
    std::memcpy(out, l.data(), sizeof(double) * l.size());
}

void gpmi_truth_speed(const gpmi_truth* truth, double* out)
{
    if (!truth || !out) return;
    const auto& s = truth->bundle.truth.speed;
    std::memcpy(out, s.data(), sizeof(double) * s.size());
}

int gpmi_truth_sample_obs(const gpmi_truth* truth, int n, double noise_sd, const char* mode, uint64_t seed,
                          int designs, gpmi_obs** out)
{
    return guarded([&] {
        need(truth, "truth");
        need(mode, "mode");
        need(out, "out");
        *out = new gpmi_obs{gpmi::sample_observations(truth->bundle.mesh, truth->bundle.truth.lat, n, noise_sd,
                                                      gpmi::parse_sampling_mode(mode), seed, designs)};
    });
}

int gpmi_validate(const char* prediction_csv, const char* truth_dir, const char* quantity, const char* report_path)
{
    return guarded([&] {
        need(prediction_csv, "prediction_csv");
        need(truth_dir, "truth_dir");
        need(quantity, "quantity");
        need(report_path, "report_path");
        gpmi::io::write_file_atomic(report_path, gpmi::validation_report(prediction_csv, truth_dir, quantity));
    });
}

/* accuracy study */

void gpmi_study_options_default(gpmi_study_options* options)
{
    if (!options) return;
    const gpmi::StudyConfig c;
    options->repeats = c.repeats;
    options->noise_sd = c.noise_sd;
    options->fit_basis = c.fit_basis;
    options->wave_sites = c.wave_sites;
    options->designs = c.designs;
    options->samples = c.samples;
    options->wave_k = c.wave_k;
    options->seed = c.seed;
    options->speed_lengthscale = c.speed.lengthscale;
    options->min_speed = c.speed.min_speed;
    options->max_speed = c.speed.max_speed;
    options->exact_radius = c.exact_radius;
    options->starts = c.fit.starts;
}

int gpmi_study_run(const gpmi_basis* basis, size_t num_counts, const int* counts, size_t num_sources,
                   const int* sources, const gpmi_study_options* options, gpmi_progress_fn progress, void* user,
                   gpmi_study** out)
{
    return guarded([&] {
        need(basis, "basis");
        need(out, "out");
        gpmi::StudyConfig c;
        if (counts && num_counts > 0) c.counts = index_list(num_counts, counts);
        if (sources && num_sources > 0) c.sources = index_list(num_sources, sources);
        if (options) {
            c.repeats = options->repeats;
            c.noise_sd = options->noise_sd;
            c.fit_basis = options->fit_basis;
            c.wave_sites = options->wave_sites;
            c.designs = options->designs;
            c.samples = options->samples;
            c.wave_k = options->wave_k;
            c.seed = options->seed;
            c.speed.lengthscale = options->speed_lengthscale;
            c.speed.min_speed = options->min_speed;
            c.speed.max_speed = options->max_speed;
            c.exact_radius = options->exact_radius;
            c.fit.starts = options->starts;
        }
        std::function<void(const std::string&)> report;
        if (progress) report = [&](const std::string& msg) { progress(msg.c_str(), user); };
        *out = new gpmi_study{gpmi::run_study(basis->basis, c, report)};
    });
}

void gpmi_study_free(gpmi_study* study)
{
    delete study;
}

size_t gpmi_study_num_rows(const gpmi_study* study)
{
    return study ? study->result.rows.size() : 0;
}

void gpmi_study_row(const gpmi_study* study, size_t r, double* out)
{
    if (!study || !out || r >= study->result.rows.size()) return;
    const auto& row = study->result.rows[r];
    const double values[9] = {static_cast<double>(row.n), row.lat_nrmse,     row.lat_coverage,
                              row.wave_nrmse,              row.wave_coverage, row.element_nrmse,
                              row.element_coverage,        row.spearman_cv_iqr, row.mean_lengthscale};
    std::memcpy(out, values, sizeof(values));
}

double gpmi_study_explained_variance(const gpmi_study* study)
{
    return study ? study->result.explained_at_fit_basis : 0.0;
}

int gpmi_study_save_csv(const gpmi_study* study, const char* path)
{
    return guarded([&] {
        need(study, "study");
        need(path, "path");
        gpmi::io::write_file_atomic(path, gpmi::format_study_csv(study->result.rows));
    });
}

} // extern "C"
