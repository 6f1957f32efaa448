#include "support.hpp"

#include <gpmi/gpmi.h>

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace {

struct Handles
{
    gpmi_mesh* mesh = nullptr;
    gpmi_basis* basis = nullptr;
    gpmi_obs* obs = nullptr;
    gpmi_model* model = nullptr;

    ~Handles()
    {
        gpmi_model_free(model);
        gpmi_obs_free(obs);
        gpmi_basis_free(basis);
        gpmi_mesh_free(mesh);
    }
};

void build(Handles& h)
{
    REQUIRE(gpmi_mesh_create_disc(10.0, 1.5, &h.mesh) == GPMI_OK);
    REQUIRE(gpmi_basis_compute(h.mesh, 25, 4, &h.basis) == GPMI_OK);
    const size_t nv = gpmi_mesh_num_vertices(h.mesh);
    std::vector<double> xyz(3 * nv);
    gpmi_mesh_vertices(h.mesh, xyz.data());
    std::vector<int> vertex;
    std::vector<double> value, sigma;
    for (size_t v = 0; v < nv; v += 3) {
        vertex.push_back(static_cast<int>(v));
        value.push_back(5.0 + 1.5 * xyz[3 * v] - 0.5 * xyz[3 * v + 1]);
        sigma.push_back(0.3);
    }
    REQUIRE(gpmi_obs_create(vertex.size(), vertex.data(), value.data(), sigma.data(), &h.obs) == GPMI_OK);
    gpmi_fit_options opt;
    gpmi_fit_options_default(&opt);
    opt.starts = 2;
    REQUIRE(gpmi_model_fit(h.basis, h.obs, &opt, &h.model) == GPMI_OK);
}

} // namespace

TEST_CASE("status names and the last error message")
{
    CHECK(std::string(gpmi_status_name(GPMI_OK)) == "ok");
    CHECK(std::string(gpmi_status_name(GPMI_ERR_INVALID_ARG)) == "invalid_argument");
    CHECK(std::string(gpmi_status_name(GPMI_ERR_STALE_CACHE)) == "stale_cache");
    CHECK(std::string(gpmi_status_name(GPMI_ERR_INTERNAL)) == "internal");
    CHECK(std::string(gpmi_status_name(42)) == "unknown");
    CHECK(std::strlen(gpmi_version()) > 0);

    gpmi_mesh* mesh = nullptr;
    CHECK(gpmi_mesh_load("/nonexistent/mesh.off", &mesh) == GPMI_ERR_IO);
    CHECK(mesh == nullptr);
    CHECK(std::strlen(gpmi_last_error()) > 0);
    CHECK(gpmi_mesh_create_disc(5.0, 1.0, &mesh) == GPMI_OK);
    CHECK(std::string(gpmi_last_error()).empty());
    gpmi_mesh_free(mesh);

    CHECK(gpmi_mesh_create_disc(5.0, 1.0, nullptr) == GPMI_ERR_INVALID_ARG);
    CHECK(std::string(gpmi_last_error()).find("NULL") != std::string::npos);
}

TEST_CASE("mesh handles expose geometry and reject bad input")
{
    testing::TempDir dir("capi_mesh");
    const double xyz[] = {0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0};
    const int faces[] = {0, 1, 2, 1, 3, 2};
    gpmi_mesh* mesh = nullptr;
    REQUIRE(gpmi_mesh_create(4, xyz, 2, faces, &mesh) == GPMI_OK);
    CHECK(gpmi_mesh_num_vertices(mesh) == 4);
    CHECK(gpmi_mesh_num_faces(mesh) == 2);
    int loops = -1;
    CHECK(gpmi_mesh_num_boundary_loops(mesh, &loops) == GPMI_OK);
    CHECK(loops == 1);
    std::vector<int> back(6);
    gpmi_mesh_faces(mesh, back.data());
    CHECK(back == std::vector<int>(faces, faces + 6));
    CHECK(gpmi_mesh_mean_edge_length(mesh) == doctest::Approx((4.0 + std::sqrt(2.0)) / 5.0));

    CHECK(gpmi_mesh_save(mesh, dir.file("square.off").c_str()) == GPMI_OK);
    gpmi_mesh* again = nullptr;
    REQUIRE(gpmi_mesh_load(dir.file("square.off").c_str(), &again) == GPMI_OK);
    CHECK(std::string(gpmi_mesh_hash(again)) == gpmi_mesh_hash(mesh));
    char hash[128];
    CHECK(gpmi_file_hash(dir.file("square.off").c_str(), hash, sizeof hash) == GPMI_OK);
    CHECK(std::strlen(hash) > 0);
    CHECK(gpmi_file_hash(dir.file("square.off").c_str(), hash, 2) == GPMI_ERR_INVALID_ARG);
    gpmi_mesh_free(again);
    gpmi_mesh_free(mesh);

    const int bad[] = {0, 1, 7};
    gpmi_mesh* broken = nullptr;
    CHECK(gpmi_mesh_create(4, xyz, 1, bad, &broken) == GPMI_ERR_MESH);
    CHECK(broken == nullptr);
    std::ofstream(dir.file("junk.off")) << "OFF\n3 1\n0 0 0\n";
    CHECK(gpmi_mesh_load(dir.file("junk.off").c_str(), &broken) == GPMI_ERR_PARSE);

    const double direction[] = {0, 0, 1};
    const double angle[] = {0.4};
    REQUIRE(gpmi_mesh_create_sphere(10.0, 2, 1, direction, angle, &broken) == GPMI_OK);
    CHECK(gpmi_mesh_num_boundary_loops(broken, &loops) == GPMI_OK);
    CHECK(loops == 1);
    gpmi_mesh_free(broken);

    gpmi_mesh_free(nullptr);
}

TEST_CASE("basis handles cache, truncate and report eigenvalues")
{
    testing::TempDir dir("capi_basis");
    gpmi_mesh* mesh = nullptr;
    REQUIRE(gpmi_mesh_create_grid(9, 9, 8.0, 8.0, &mesh) == GPMI_OK);
    gpmi_basis* a = nullptr;
    int reused = -1;
    REQUIRE(gpmi_basis_cached(mesh, 12, 3, dir.str().c_str(), &reused, &a) == GPMI_OK);
    CHECK(reused == 0);
    gpmi_basis* b = nullptr;
    REQUIRE(gpmi_basis_cached(mesh, 12, 3, dir.str().c_str(), &reused, &b) == GPMI_OK);
    CHECK(reused == 1);
    CHECK(gpmi_basis_size(b) == 12);
    CHECK(gpmi_basis_extend_layers(b) == 3);
    CHECK(gpmi_basis_max_residual(b) < 1e-8);

    std::vector<double> la(12), lb(12);
    gpmi_basis_eigenvalues(a, la.data());
    gpmi_basis_eigenvalues(b, lb.data());
    CHECK(la == lb);
    CHECK(std::abs(la[0]) < 1e-8);
    for (int i = 1; i < 12; ++i) CHECK(la[i] >= la[i - 1]);

    gpmi_basis* t = nullptr;
    REQUIRE(gpmi_basis_truncate(a, 5, &t) == GPMI_OK);
    CHECK(gpmi_basis_size(t) == 5);
    CHECK(gpmi_basis_truncate(a, 13, &t) == GPMI_ERR_INVALID_ARG);
    gpmi_basis_free(t);

    gpmi_mesh* copy = nullptr;
    REQUIRE(gpmi_basis_mesh(a, &copy) == GPMI_OK);
    CHECK(std::string(gpmi_mesh_hash(copy)) == gpmi_mesh_hash(mesh));
    gpmi_mesh_free(copy);

    CHECK(gpmi_basis_compute(mesh, 0, 3, &t) == GPMI_ERR_INVALID_ARG);
    CHECK(gpmi_basis_load((dir.str() + "/none").c_str(), &t) != GPMI_OK);
    gpmi_basis_free(a);
    gpmi_basis_free(b);
    gpmi_mesh_free(mesh);
}

TEST_CASE("observation handles round trip through CSV")
{
    testing::TempDir dir("capi_obs");
    const int vertex[] = {2, 5};
    const double value[] = {1.5, -2.25};
    gpmi_obs* obs = nullptr;
    REQUIRE(gpmi_obs_create(2, vertex, value, nullptr, &obs) == GPMI_OK);
    CHECK(gpmi_obs_save_csv(obs, dir.file("o.csv").c_str()) == GPMI_OK);
    gpmi_obs* back = nullptr;
    REQUIRE(gpmi_obs_load_csv(dir.file("o.csv").c_str(), &back) == GPMI_OK);
    CHECK(gpmi_obs_size(back) == 2);
    int v[2];
    double y[2], s[2];
    gpmi_obs_get(back, v, y, s);
    CHECK(v[0] == 2);
    CHECK(v[1] == 5);
    CHECK(y[1] == -2.25);
    CHECK(s[0] == 0.0);
    gpmi_obs_get(back, nullptr, nullptr, nullptr);
    gpmi_obs_free(back);
    gpmi_obs_free(obs);

    const double negative[] = {-1.0, 0.0};
    CHECK(gpmi_obs_create(2, vertex, value, negative, &obs) == GPMI_ERR_INVALID_ARG);
}

TEST_CASE("fitted models predict, save and reload")
{
    testing::TempDir dir("capi_model");
    Handles h;
    build(h);
    gpmi_hyperparams hp;
    gpmi_model_hyperparams(h.model, &hp);
    CHECK(hp.nu == 3);
    CHECK(hp.lengthscale > 0.0);
    CHECK(std::isfinite(gpmi_model_log_likelihood(h.model)));

    const size_t nv = gpmi_mesh_num_vertices(h.mesh);
    std::vector<double> mean(nv), var(nv);
    REQUIRE(gpmi_model_predict_vertices(h.model, 0, nullptr, mean.data(), var.data()) == GPMI_OK);
    for (double x : var) CHECK(x >= 0.0);
    const int some[] = {3, 0};
    double m2[2], v2[2];
    REQUIRE(gpmi_model_predict_vertices(h.model, 2, some, m2, v2) == GPMI_OK);
    CHECK(m2[0] == doctest::Approx(mean[3]).epsilon(1e-12));
    CHECK(v2[1] == doctest::Approx(var[0]).epsilon(1e-12));
    const int out_of_range[] = {static_cast<int>(nv)};
    CHECK(gpmi_model_predict_vertices(h.model, 1, out_of_range, m2, v2) == GPMI_ERR_INVALID_ARG);

    std::vector<double> ev(25);
    gpmi_model_explained_variance(h.model, ev.data());
    CHECK(ev.back() == doctest::Approx(100.0));

    REQUIRE(gpmi_basis_save(h.basis, dir.file("basis").c_str()) == GPMI_OK);
    REQUIRE(gpmi_model_save(h.model, dir.file("basis").c_str(), dir.file("model.json").c_str()) == GPMI_OK);
    gpmi_model* back = nullptr;
    REQUIRE(gpmi_model_load(dir.file("model.json").c_str(), &back) == GPMI_OK);
    std::vector<double> mean2(nv), var2(nv);
    REQUIRE(gpmi_model_predict_vertices(back, 0, nullptr, mean2.data(), var2.data()) == GPMI_OK);
    CHECK(mean2 == mean);
    CHECK(var2 == var);
    gpmi_model_free(back);

    CHECK(gpmi_model_write_prediction(h.model, dir.file("p.csv").c_str(), dir.file("p.vtk").c_str()) == GPMI_OK);
    std::ifstream csv(dir.file("p.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header == "point_id,kind,mean_ms,sd_ms");

    gpmi_model* fixed = nullptr;
    hp.nu = 1;
    REQUIRE(gpmi_model_create(h.basis, h.obs, &hp, 1e-8, &fixed) == GPMI_OK);
    gpmi_gradient* g = nullptr;
    CHECK(gpmi_model_gradient(fixed, 0, nullptr, &g) == GPMI_ERR_INVALID_ARG);
    gpmi_model_free(fixed);
    hp.nu = 4;
    CHECK(gpmi_model_create(h.basis, h.obs, &hp, 1e-8, &fixed) == GPMI_ERR_INVALID_ARG);
}

TEST_CASE("gradient and CV handles agree with each other")
{
    testing::TempDir dir("capi_cv");
    Handles h;
    build(h);
    gpmi_gradient* g = nullptr;
    REQUIRE(gpmi_model_gradient(h.model, 0, nullptr, &g) == GPMI_OK);
    const size_t nf = gpmi_mesh_num_faces(h.mesh);
    REQUIRE(gpmi_gradient_size(g) == nf);
    std::vector<int> faces(nf);
    std::vector<double> mean(3 * nf), cov(9 * nf);
    gpmi_gradient_get(g, faces.data(), mean.data(), cov.data());
    for (size_t f = 0; f < nf; ++f) {
        CHECK(faces[f] == static_cast<int>(f));
        CHECK(std::abs(mean[3 * f + 2]) < 1e-9);
        CHECK(cov[9 * f + 1] == cov[9 * f + 3]);
    }

    gpmi_cv* cv = nullptr;
    REQUIRE(gpmi_cv_sample(g, 500, 9, &cv) == GPMI_OK);
    CHECK(gpmi_cv_size(cv) == nf);
    std::vector<double> gm(nf), gp(5 * nf), cp(5 * nf), iqr(nf);
    gpmi_cv_get(cv, nullptr, gm.data(), nullptr, gp.data(), cp.data(), iqr.data());
    for (size_t f = 0; f < nf; ++f) {
        CHECK(gm[f] == doctest::Approx(std::hypot(mean[3 * f], mean[3 * f + 1])).epsilon(1e-9));
        for (int r = 0; r < 5; ++r) CHECK(cp[5 * f + r] == 1.0 / gp[5 * f + 4 - r]);
        CHECK(iqr[f] == doctest::Approx(cp[5 * f + 3] - cp[5 * f + 1]));
    }
    gpmi_cv* again = nullptr;
    REQUIRE(gpmi_cv_sample(g, 500, 9, &again) == GPMI_OK);
    std::vector<double> cp2(5 * nf);
    gpmi_cv_get(again, nullptr, nullptr, nullptr, nullptr, cp2.data(), nullptr);
    CHECK(cp2 == cp);
    CHECK(gpmi_cv_save_csv(cv, dir.file("cv.csv").c_str()) == GPMI_OK);
    CHECK(gpmi_cv_save_vtk(cv, h.mesh, dir.file("cv.vtk").c_str()) == GPMI_OK);
    CHECK(gpmi_cv_sample(g, 0, 9, &again) == GPMI_ERR_INVALID_ARG);
    gpmi_cv_free(again);
    gpmi_cv_free(cv);

    const int pick[] = {4, 1};
    gpmi_gradient* two = nullptr;
    REQUIRE(gpmi_model_gradient(h.model, 2, pick, &two) == GPMI_OK);
    double m2[6];
    int f2[2];
    gpmi_gradient_get(two, f2, m2, nullptr);
    CHECK(f2[0] == 4);
    CHECK(m2[0] == doctest::Approx(mean[12]).epsilon(1e-12));
    gpmi_gradient_free(two);
    gpmi_gradient_free(g);
}

TEST_CASE("virtual patient, validation and study through the C API")
{
    testing::TempDir dir("capi_truth");
    Handles h;
    REQUIRE(gpmi_mesh_create_disc(10.0, 1.5, &h.mesh) == GPMI_OK);
    REQUIRE(gpmi_basis_compute(h.mesh, 25, 4, &h.basis) == GPMI_OK);

    gpmi_truth_options topt;
    gpmi_truth_options_default(&topt);
    topt.speed_lengthscale = 5.0;
    topt.wave_sites = 20;
    topt.designs = 10;
    const int source[] = {0};
    gpmi_truth* truth = nullptr;
    REQUIRE(gpmi_truth_simulate(h.basis, 1, source, &topt, &truth) == GPMI_OK);
    const size_t nv = gpmi_truth_num_vertices(truth);
    CHECK(nv == gpmi_mesh_num_vertices(h.mesh));
    std::vector<double> lat(nv), speed(nv);
    gpmi_truth_lat(truth, lat.data());
    gpmi_truth_speed(truth, speed.data());
    CHECK(lat[0] == 0.0);
    for (size_t v = 0; v < nv; ++v) {
        CHECK(speed[v] >= topt.min_speed);
        CHECK(speed[v] <= topt.max_speed);
    }
    REQUIRE(gpmi_truth_save(truth, dir.file("truth").c_str()) == GPMI_OK);
    gpmi_truth* loaded = nullptr;
    REQUIRE(gpmi_truth_load(dir.file("truth").c_str(), &loaded) == GPMI_OK);
    std::vector<double> lat2(nv);
    gpmi_truth_lat(loaded, lat2.data());
    CHECK(lat2 == lat);
    gpmi_truth_free(loaded);

    REQUIRE(gpmi_truth_sample_obs(truth, 40, 0.5, "maximin", 2, 10, &h.obs) == GPMI_OK);
    CHECK(gpmi_obs_size(h.obs) == 40);
    gpmi_obs* unused = nullptr;
    CHECK(gpmi_truth_sample_obs(truth, 40, 0.5, "grid", 2, 10, &unused) == GPMI_ERR_INVALID_ARG);

    gpmi_fit_options fopt;
    gpmi_fit_options_default(&fopt);
    fopt.starts = 2;
    REQUIRE(gpmi_model_fit(h.basis, h.obs, &fopt, &h.model) == GPMI_OK);
    REQUIRE(gpmi_model_write_prediction(h.model, dir.file("pred.csv").c_str(), nullptr) == GPMI_OK);
    REQUIRE(gpmi_validate(dir.file("pred.csv").c_str(), dir.file("truth").c_str(), "lat",
                          dir.file("report.json").c_str()) == GPMI_OK);
    std::ifstream report(dir.file("report.json"));
    const std::string text((std::istreambuf_iterator<char>(report)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"nrmse\"") != std::string::npos);
    CHECK(gpmi_validate(dir.file("pred.csv").c_str(), dir.file("truth").c_str(), "cv",
                        dir.file("report.json").c_str()) == GPMI_ERR_INVALID_ARG);
    gpmi_truth_free(truth);

    gpmi_study_options sopt;
    gpmi_study_options_default(&sopt);
    sopt.repeats = 1;
    sopt.fit_basis = 20;
    sopt.wave_sites = 15;
    sopt.designs = 10;
    sopt.samples = 100;
    sopt.starts = 2;
    sopt.speed_lengthscale = 5.0;
    const int counts[] = {20, 30};
    int calls = 0;
    auto progress = [](const char*, void* user) { ++*static_cast<int*>(user); };
    gpmi_study* study = nullptr;
    REQUIRE(gpmi_study_run(h.basis, 2, counts, 0, nullptr, &sopt, progress, &calls, &study) == GPMI_OK);
    CHECK(calls > 0);
    REQUIRE(gpmi_study_num_rows(study) == 2);
    double row[9];
    gpmi_study_row(study, 1, row);
    CHECK(row[0] == 30.0);
    CHECK(row[1] > 0.0);
    CHECK(gpmi_study_explained_variance(study) > 0.0);
    CHECK(gpmi_study_explained_variance(study) <= 100.0);
    CHECK(gpmi_study_save_csv(study, dir.file("study.csv").c_str()) == GPMI_OK);
    gpmi_study_free(study);
}

TEST_CASE("thread count is adjustable and validated")
{
    const int before = gpmi_num_threads();
    CHECK(gpmi_set_num_threads(3) == GPMI_OK);
    CHECK(gpmi_num_threads() == 3);
    CHECK(gpmi_set_num_threads(0) == GPMI_ERR_INVALID_ARG);
    CHECK(gpmi_set_num_threads(before) == GPMI_OK);
}
