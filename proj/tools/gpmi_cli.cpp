#include <gpmi/gpmi.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Carries a C API status out of a subcommand.
struct Failure
{
    int status;
    std::string message;
};

void check(int status)
{
    if (status != GPMI_OK) throw Failure{status, gpmi_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Handle
{
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
    T* get() const { return p; }
};

using Mesh = Handle<gpmi_mesh, gpmi_mesh_free>;
using Basis = Handle<gpmi_basis, gpmi_basis_free>;
using Obs = Handle<gpmi_obs, gpmi_obs_free>;
using Model = Handle<gpmi_model, gpmi_model_free>;
using Gradient = Handle<gpmi_gradient, gpmi_gradient_free>;
using Cv = Handle<gpmi_cv, gpmi_cv_free>;
using Truth = Handle<gpmi_truth, gpmi_truth_free>;
using Study = Handle<gpmi_study, gpmi_study_free>;

std::string hash_of_file(const std::string& path)
{
    char buf[64];
    check(gpmi_file_hash(path.c_str(), buf, sizeof(buf)));
    return buf;
}

bool is_manifest(const fs::path& p)
{
    const std::string name = p.filename().string();
    return name.size() > 14 && name.ends_with(".manifest.json");
}

/// Hash of a file, or of the sorted file hashes inside a directory.
std::string hash_of_input(const std::string& path)
{
    if (!fs::is_directory(path)) return hash_of_file(path);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file() && !is_manifest(e.path())) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string joined;
    for (const auto& f : files) joined += f.filename().string() + ":" + hash_of_file(f.string()) + "\n";
    const fs::path tmp = fs::temp_directory_path() / ("gpmi-hash-" + std::to_string(std::hash<std::string>{}(path)));
    std::ofstream(tmp, std::ios::binary) << joined;
    const std::string h = hash_of_file(tmp.string());
    fs::remove(tmp);
    return h;
}

std::string manifest_path(const std::string& out)
{
    std::string base = fs::path(out).lexically_normal().string();
    while (base.size() > 1 && base.back() == '/') base.pop_back();
    return base + ".manifest.json";
}

/// Run record written next to the primary output once everything else exists.
class RunManifest
{
public:
    RunManifest(std::string subcommand, const CLI::App& app)
        : m_subcommand(std::move(subcommand))
        , m_start(std::chrono::steady_clock::now())
    {
        for (const CLI::Option* opt : app.get_options()) {
            if (opt->get_name() == "--help") continue;
            const std::string name = opt->get_name();
            if (opt->count() > 0) {
                const auto& r = opt->results();
                m_flags[name] = r.size() == 1 ? json(r.front()) : json(r);
            } else if (!opt->get_default_str().empty()) {
                m_flags[name] = opt->get_default_str();
            }
        }
    }

    void input(const std::string& path) { m_inputs[path] = hash_of_input(path); }
    void seed(const std::string& name, std::uint64_t value) { m_seeds[name] = value; }
    void output(const std::string& path) { m_outputs.push_back(path); }
    void note(const std::string& key, json value) { m_notes[key] = std::move(value); }

    void write(const std::string& primary)
    {
        for (const auto& o : m_outputs) {
            if (!fs::exists(o)) throw Failure{GPMI_ERR_INTERNAL, "output " + o + " missing at exit"};
        }
        json j;
        j["subcommand"] = m_subcommand;
        j["flags"] = m_flags;
        j["inputs"] = m_inputs;
        j["seeds"] = m_seeds;
        j["tool_version"] = gpmi_version();
        j["threads"] = gpmi_num_threads();
        j["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - m_start).count();
        j["outputs"] = m_outputs;
        if (!m_notes.empty()) j["details"] = m_notes;
        const std::string path = manifest_path(primary);
        const std::string tmp = path + ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary);
            f << j.dump(2) << "\n";
            if (!f) throw Failure{GPMI_ERR_IO, "cannot write " + tmp};
        }
        fs::rename(tmp, path);
    }

private:
    std::string m_subcommand;
    std::chrono::steady_clock::time_point m_start;
    json m_flags = json::object();
    json m_inputs = json::object();
    json m_seeds = json::object();
    json m_notes = json::object();
    std::vector<std::string> m_outputs;
};

void ensure_parent(const std::string& path)
{
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

std::string dir_file(const std::string& dir, const char* name)
{
    return (fs::path(dir) / name).string();
}

void basis_for_mesh(Basis& basis, const gpmi_mesh* mesh, int num_basis, int layers, const std::string& cache)
{
    if (cache.empty()) {
        check(gpmi_basis_compute(mesh, num_basis, layers, basis.out()));
    } else {
        check(gpmi_basis_cached(mesh, num_basis, layers, cache.c_str(), nullptr, basis.out()));
    }
}

const std::vector<std::array<double, 4>> kHolePresets = {
    {0.0, 0.0, 1.0, 0.35}, {1.0, 0.0, 0.3, 0.25}, {-1.0, 0.5, -0.2, 0.25}, {0.0, -1.0, -0.5, 0.2}};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Gaussian-process interpolation of activation times on triangle meshes"};
    app.require_subcommand(1);
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app.add_option("--threads", threads, "Worker threads (outputs do not depend on it)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    std::function<void()> action;

    // mesh
    auto* mesh_cmd = app.add_subcommand("mesh", "Generate a test mesh");
    std::string mesh_shape = "disc", mesh_out;
    double radius = 100.0, edge = 2.5, width = 1.0, height = 1.0;
    int nx = 65, ny = 65, levels = 5, holes = 2;
    mesh_cmd->add_option("--shape", mesh_shape, "disc, grid or sphere")
        ->check(CLI::IsMember({"disc", "grid", "sphere"}))
        ->capture_default_str();
    mesh_cmd->add_option("--radius", radius, "Disc or sphere radius (mm)")->capture_default_str();
    mesh_cmd->add_option("--edge", edge, "Disc edge length (mm)")->capture_default_str();
    mesh_cmd->add_option("--nx", nx, "Grid vertices along x")->capture_default_str();
    mesh_cmd->add_option("--ny", ny, "Grid vertices along y")->capture_default_str();
    mesh_cmd->add_option("--width", width, "Grid width (mm)")->capture_default_str();
    mesh_cmd->add_option("--height", height, "Grid height (mm)")->capture_default_str();
    mesh_cmd->add_option("--levels", levels, "Sphere subdivision levels")->capture_default_str();
    mesh_cmd->add_option("--holes", holes, "Sphere holes (0-4)")->check(CLI::Range(0, 4))->capture_default_str();
    mesh_cmd->add_option("--out", mesh_out, "Output .ply or .off")->required();
    mesh_cmd->callback([&] {
        action = [&] {
            RunManifest man("mesh", *mesh_cmd);
            Mesh m;
            if (mesh_shape == "disc") {
                check(gpmi_mesh_create_disc(radius, edge, m.out()));
            } else if (mesh_shape == "grid") {
                check(gpmi_mesh_create_grid(nx, ny, width, height, m.out()));
            } else {
                std::vector<double> dirs, angles;
                for (int h = 0; h < holes; ++h) {
                    dirs.insert(dirs.end(), kHolePresets[h].begin(), kHolePresets[h].begin() + 3);
                    angles.push_back(kHolePresets[h][3]);
                }
                check(gpmi_mesh_create_sphere(radius, levels, holes, dirs.data(), angles.data(), m.out()));
            }
            ensure_parent(mesh_out);
            check(gpmi_mesh_save(m.get(), mesh_out.c_str()));
            man.output(mesh_out);
            man.note("vertices", gpmi_mesh_num_vertices(m.get()));
            man.note("faces", gpmi_mesh_num_faces(m.get()));
            man.write(mesh_out);
            std::printf("%zu vertices, %zu faces -> %s\n", gpmi_mesh_num_vertices(m.get()), gpmi_mesh_num_faces(m.get()),
                        mesh_out.c_str());
        };
    });

    // eigs
    auto* eigs = app.add_subcommand("eigs", "Compute or reuse the Laplacian eigenbasis of a mesh");
    std::string eigs_mesh, eigs_out;
    int num_basis = 256, extend_layers = 15;
    eigs->add_option("--mesh", eigs_mesh, "Input mesh (.ply or .off)")->required()->check(CLI::ExistingFile);
    eigs->add_option("--num-basis", num_basis, "Number of eigenfunctions")->capture_default_str();
    eigs->add_option("--extend-layers", extend_layers, "Boundary extension layers")->capture_default_str();
    eigs->add_option("--out", eigs_out, "Basis directory")->required();
    eigs->callback([&] {
        action = [&] {
            RunManifest man("eigs", *eigs);
            man.input(eigs_mesh);
            Mesh m;
            check(gpmi_mesh_load(eigs_mesh.c_str(), m.out()));
            Basis b;
            int reused = 0;
            check(gpmi_basis_cached(m.get(), num_basis, extend_layers, eigs_out.c_str(), &reused, b.out()));
            for (const char* f : {"manifest.json", "phi_v.bin", "phi_c.bin", "grad_phi_c.bin", "mesh.ply"}) {
                man.output(dir_file(eigs_out, f));
            }
            man.note("reused_cache", reused != 0);
            man.note("max_residual", gpmi_basis_max_residual(b.get()));
            man.write(eigs_out);
            std::printf("%s basis of %d functions in %s (max residual %.3g)\n", reused ? "reused" : "computed",
                        gpmi_basis_size(b.get()), eigs_out.c_str(), gpmi_basis_max_residual(b.get()));
        };
    });

    // fit
    auto* fit = app.add_subcommand("fit", "Fit hyperparameters to observations");
    std::string fit_basis, fit_obs, fit_out, fit_nu = "3/2";
    int fit_m = 0;
    gpmi_fit_options fo;
    gpmi_fit_options_default(&fo);
    fit->add_option("--basis", fit_basis, "Basis directory")->required()->check(CLI::ExistingDirectory);
    fit->add_option("--obs", fit_obs, "Observation CSV (vertex_id, lat_ms[, sigma_ms])")
        ->required()
        ->check(CLI::ExistingFile);
    fit->add_option("--out", fit_out, "Model JSON")->required();
    fit->add_option("--num-basis", fit_m, "Use only the first functions (0 = all)")->capture_default_str();
    fit->add_option("--nu", fit_nu, "Matern smoothness")->check(CLI::IsMember({"1/2", "3/2", "5/2"}))->capture_default_str();
    fit->add_option("--starts", fo.starts, "Optimizer starts")->capture_default_str();
    fit->add_option("--seed", fo.seed, "Seed for the start design")->capture_default_str();
    fit->add_option("--jitter", fo.jitter, "Variance added for numerical stability")->capture_default_str();
    fit->add_option("--lengthscale-min", fo.lengthscale_min, "Lower length-scale bound (0 = mean edge length)")
        ->capture_default_str();
    fit->add_option("--lengthscale-max", fo.lengthscale_max, "Upper length-scale bound (0 = mesh diameter)")
        ->capture_default_str();
    fit->add_option("--max-evaluations", fo.max_evaluations, "Likelihood evaluations per start")->capture_default_str();
    fit->callback([&] {
        action = [&] {
            RunManifest man("fit", *fit);
            man.input(fit_basis);
            man.input(fit_obs);
            man.seed("fit", fo.seed);
            Basis full, b;
            check(gpmi_basis_load(fit_basis.c_str(), full.out()));
            const gpmi_basis* use = full.get();
            if (fit_m > 0) {
                check(gpmi_basis_truncate(full.get(), fit_m, b.out()));
                use = b.get();
            }
            Obs o;
            check(gpmi_obs_load_csv(fit_obs.c_str(), o.out()));
            fo.nu = fit_nu == "1/2" ? 1 : fit_nu == "5/2" ? 5 : 3;
            Model model;
            check(gpmi_model_fit(use, o.get(), &fo, model.out()));
            ensure_parent(fit_out);
            const std::string basis_abs = fs::absolute(fit_basis).lexically_normal().string();
            check(gpmi_model_save(model.get(), basis_abs.c_str(), fit_out.c_str()));
            gpmi_hyperparams hp;
            gpmi_model_hyperparams(model.get(), &hp);
            man.output(fit_out);
            man.write(fit_out);
            std::printf("l=%.6g mm tau2=%.6g eta=%.6g log-likelihood=%.6g -> %s\n", hp.lengthscale, hp.tau2, hp.eta,
                        gpmi_model_log_likelihood(model.get()), fit_out.c_str());
        };
    });

    // predict
    auto* predict = app.add_subcommand("predict", "Posterior LAT mean and SD at every vertex");
    std::string pred_model, pred_out, pred_vtk;
    predict->add_option("--model", pred_model, "Model JSON")->required()->check(CLI::ExistingFile);
    predict->add_option("--out", pred_out, "Output CSV")->required();
    predict->add_option("--vtk", pred_vtk, "Optional VTK output");
    predict->callback([&] {
        action = [&] {
            RunManifest man("predict", *predict);
            man.input(pred_model);
            Model model;
            check(gpmi_model_load(pred_model.c_str(), model.out()));
            ensure_parent(pred_out);
            if (!pred_vtk.empty()) ensure_parent(pred_vtk);
            check(gpmi_model_write_prediction(model.get(), pred_out.c_str(), pred_vtk.empty() ? nullptr : pred_vtk.c_str()));
            man.output(pred_out);
            if (!pred_vtk.empty()) man.output(pred_vtk);
            man.write(pred_out);
            std::printf("prediction -> %s\n", pred_out.c_str());
        };
    });

    // cv
    auto* cv = app.add_subcommand("cv", "Monte-Carlo gradient magnitude and conduction velocity statistics");
    std::string cv_model, cv_out, cv_vtk;
    int samples = 2000;
    std::uint64_t cv_seed = 0;
    cv->add_option("--model", cv_model, "Model JSON")->required()->check(CLI::ExistingFile);
    cv->add_option("--samples", samples, "Samples per face")->capture_default_str();
    cv->add_option("--seed", cv_seed, "Sampling seed")->capture_default_str();
    cv->add_option("--out", cv_out, "Output CSV")->required();
    cv->add_option("--vtk", cv_vtk, "Optional VTK output");
    cv->callback([&] {
        action = [&] {
            RunManifest man("cv", *cv);
            man.input(cv_model);
            man.seed("cv", cv_seed);
            Model model;
            check(gpmi_model_load(cv_model.c_str(), model.out()));
            Gradient g;
            check(gpmi_model_gradient(model.get(), 0, nullptr, g.out()));
            Cv c;
            check(gpmi_cv_sample(g.get(), samples, cv_seed, c.out()));
            ensure_parent(cv_out);
            check(gpmi_cv_save_csv(c.get(), cv_out.c_str()));
            man.output(cv_out);
            if (!cv_vtk.empty()) {
                Mesh m;
                check(gpmi_model_mesh(model.get(), m.out()));
                ensure_parent(cv_vtk);
                check(gpmi_cv_save_vtk(c.get(), m.get(), cv_vtk.c_str()));
                man.output(cv_vtk);
            }
            man.write(cv_out);
            std::printf("CV statistics for %zu faces -> %s\n", gpmi_cv_size(c.get()), cv_out.c_str());
        };
    });

    // simulate
    auto* sim = app.add_subcommand("simulate", "Eikonal virtual patient with ground-truth LAT and CV");
    std::string sim_mesh, sim_out, sim_cache;
    std::vector<int> sources = {0};
    gpmi_truth_options to;
    gpmi_truth_options_default(&to);
    int sim_basis = 256;
    sim->add_option("--mesh", sim_mesh, "Input mesh")->required()->check(CLI::ExistingFile);
    sim->add_option("--speed-seed", to.speed_seed, "Seed of the speed field")->capture_default_str();
    sim->add_option("--sources", sources, "Source vertices")->delimiter(',')->capture_default_str();
    sim->add_option("--out", sim_out, "Truth directory")->required();
    sim->add_option("--basis-cache", sim_cache, "Basis cache directory for the speed prior");
    sim->add_option("--num-basis", sim_basis, "Eigenfunctions for the speed prior")->capture_default_str();
    sim->add_option("--extend-layers", extend_layers, "Boundary extension layers")->capture_default_str();
    sim->add_option("--speed-lengthscale", to.speed_lengthscale, "Speed correlation length (mm)")->capture_default_str();
    sim->add_option("--min-speed", to.min_speed, "Minimum speed (mm/ms)")->capture_default_str();
    sim->add_option("--max-speed", to.max_speed, "Maximum speed (mm/ms)")->capture_default_str();
    sim->add_option("--wave-sites", to.wave_sites, "Faces with wave-method CV (0 = all)")->capture_default_str();
    sim->add_option("--wave-k", to.wave_k, "Vertices per wave-method fit")->capture_default_str();
    sim->add_option("--designs", to.designs, "Maximin designs for wave sites")->capture_default_str();
    sim->add_option("--site-seed", to.site_seed, "Seed of the wave-site design")->capture_default_str();
    sim->callback([&] {
        action = [&] {
            RunManifest man("simulate", *sim);
            man.input(sim_mesh);
            man.seed("speed", to.speed_seed);
            man.seed("sites", to.site_seed);
            Mesh m;
            check(gpmi_mesh_load(sim_mesh.c_str(), m.out()));
            Basis b;
            basis_for_mesh(b, m.get(), sim_basis, extend_layers, sim_cache);
            Truth t;
            check(gpmi_truth_simulate(b.get(), sources.size(), sources.data(), &to, t.out()));
            check(gpmi_truth_save(t.get(), sim_out.c_str()));
            for (const char* f : {"truth.json", "mesh.ply", "lat.csv", "element.csv", "wave.csv"}) {
                man.output(dir_file(sim_out, f));
            }
            man.write(sim_out);
            std::printf("virtual patient -> %s\n", sim_out.c_str());
        };
    });

    // sample-obs
    auto* so = app.add_subcommand("sample-obs", "Noisy LAT observations from a virtual patient");
    std::string so_truth, so_out, so_mode = "random";
    int so_n = 250, so_designs = 10000;
    double noise_sd = 1.0;
    std::uint64_t so_seed = 0;
    so->add_option("--truth", so_truth, "Truth directory")->required()->check(CLI::ExistingDirectory);
    so->add_option("--n", so_n, "Number of observations")->capture_default_str();
    so->add_option("--noise-sd", noise_sd, "Noise SD (ms)")->capture_default_str();
    so->add_option("--mode", so_mode, "random or maximin")->check(CLI::IsMember({"random", "maximin"}))->capture_default_str();
    so->add_option("--designs", so_designs, "Maximin designs")->capture_default_str();
    so->add_option("--seed", so_seed, "Sampling seed")->capture_default_str();
    so->add_option("--out", so_out, "Observation CSV")->required();
    so->callback([&] {
        action = [&] {
            RunManifest man("sample-obs", *so);
            man.input(so_truth);
            man.seed("sample", so_seed);
            Truth t;
            check(gpmi_truth_load(so_truth.c_str(), t.out()));
            Obs o;
            check(gpmi_truth_sample_obs(t.get(), so_n, noise_sd, so_mode.c_str(), so_seed, so_designs, o.out()));
            ensure_parent(so_out);
            check(gpmi_obs_save_csv(o.get(), so_out.c_str()));
            man.output(so_out);
            man.write(so_out);
            std::printf("%zu observations -> %s\n", gpmi_obs_size(o.get()), so_out.c_str());
        };
    });

    // validate
    auto* val = app.add_subcommand("validate", "Score a prediction against a virtual patient");
    std::string val_pred, val_truth, val_out, quantity = "lat";
    val->add_option("--pred", val_pred, "predict or cv output CSV")->required()->check(CLI::ExistingFile);
    val->add_option("--truth", val_truth, "Truth directory")->required()->check(CLI::ExistingDirectory);
    val->add_option("--quantity", quantity, "lat or gradmag")->check(CLI::IsMember({"lat", "gradmag"}))->capture_default_str();
    val->add_option("--out", val_out, "Report JSON")->required();
    val->callback([&] {
        action = [&] {
            RunManifest man("validate", *val);
            man.input(val_pred);
            man.input(val_truth);
            ensure_parent(val_out);
            check(gpmi_validate(val_pred.c_str(), val_truth.c_str(), quantity.c_str(), val_out.c_str()));
            man.output(val_out);
            man.write(val_out);
            std::printf("report -> %s\n", val_out.c_str());
        };
    });

    // study-table2
    auto* st = app.add_subcommand("study-table2", "Accuracy and coverage versus observation count");
    std::string st_mesh, st_out, st_cache;
    std::vector<int> counts = {50, 100, 250, 500, 750, 1000};
    std::vector<int> st_sources = {0};
    gpmi_study_options so_opts;
    gpmi_study_options_default(&so_opts);
    int st_basis = 350;
    bool quiet = false;
    st->add_option("--mesh", st_mesh, "Input mesh")->required()->check(CLI::ExistingFile);
    st->add_option("--counts", counts, "Observation counts")->delimiter(',')->capture_default_str();
    st->add_option("--repeats", so_opts.repeats, "Designs per count")->capture_default_str();
    st->add_option("--out", st_out, "Table CSV")->required();
    st->add_option("--seed", so_opts.seed, "Study seed")->capture_default_str();
    st->add_option("--sources", st_sources, "Source vertices")->delimiter(',')->capture_default_str();
    st->add_option("--num-basis", st_basis, "Eigenfunctions computed")->capture_default_str();
    st->add_option("--fit-basis", so_opts.fit_basis, "Eigenfunctions used for fitting")->capture_default_str();
    st->add_option("--extend-layers", extend_layers, "Boundary extension layers")->capture_default_str();
    st->add_option("--basis-cache", st_cache, "Basis cache directory");
    st->add_option("--noise-sd", so_opts.noise_sd, "Observation noise SD (ms)")->capture_default_str();
    st->add_option("--samples", so_opts.samples, "CV samples per face")->capture_default_str();
    st->add_option("--wave-sites", so_opts.wave_sites, "Faces with wave-method truth")->capture_default_str();
    st->add_option("--designs", so_opts.designs, "Maximin designs for wave sites")->capture_default_str();
    st->add_option("--starts", so_opts.starts, "Optimizer starts per fit")->capture_default_str();
    st->add_flag("--quiet", quiet, "No progress output");
    st->callback([&] {
        action = [&] {
            RunManifest man("study-table2", *st);
            man.input(st_mesh);
            man.seed("study", so_opts.seed);
            Mesh m;
            check(gpmi_mesh_load(st_mesh.c_str(), m.out()));
            Basis b;
            basis_for_mesh(b, m.get(), st_basis, extend_layers, st_cache);
            auto progress = [](const char* msg, void* user) {
                if (!*static_cast<bool*>(user)) std::fprintf(stderr, "%s\n", msg);
            };
            Study s;
            check(gpmi_study_run(b.get(), counts.size(), counts.data(), st_sources.size(), st_sources.data(), &so_opts,
                                 progress, &quiet, s.out()));
            ensure_parent(st_out);
            check(gpmi_study_save_csv(s.get(), st_out.c_str()));
            json rows = json::array();
            for (size_t r = 0; r < gpmi_study_num_rows(s.get()); ++r) {
                double v[9];
                gpmi_study_row(s.get(), r, v);
                rows.push_back({{"n", static_cast<int>(v[0])}, {"spearman_inverse_grad_vs_cv_iqr", v[7]},
                                {"mean_lengthscale", v[8]}});
            }
            man.note("rows", rows);
            man.note("explained_variance_at_fit_basis", gpmi_study_explained_variance(s.get()));
            man.output(st_out);
            man.write(st_out);
            std::printf("study table -> %s\n", st_out.c_str());
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: usage: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        check(gpmi_set_num_threads(threads));
        action();
    } catch (const Failure& f) {
        std::cerr << "error: " << gpmi_status_name(f.status) << ": " << f.message << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
