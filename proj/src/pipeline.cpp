#include <gpmi/basis_cache.hpp>
#include <gpmi/error.hpp>
#include <gpmi/io.hpp>
#include <gpmi/mesh_io.hpp>
#include <gpmi/metrics.hpp>
#include <gpmi/pipeline.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>

namespace gpmi {

namespace fs = std::filesystem;
using io::format_double;
using nlohmann::json;

namespace {

constexpr const char* kModelFormat = "gpmi-model-1";
constexpr const char* kTruthFormat = "gpmi-truth-1";

json number(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

double number_of(const json& j)
{
    return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

json hp_json(const Hyperparams& hp)
{
    return {{"nu", to_string(hp.nu)}, {"lengthscale", hp.lengthscale}, {"tau2", hp.tau2}, {"eta", hp.eta}};
}

Hyperparams hp_of(const json& j)
{
    Hyperparams hp;
    hp.nu = parse_smoothness(j.at("nu").get<std::string>());
    hp.lengthscale = j.at("lengthscale").get<double>();
    hp.tau2 = j.at("tau2").get<double>();
    hp.eta = j.at("eta").get<double>();
    return hp;
}

json parse_json(const std::string& path)
{
    try {
        return json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, path + ": " + e.what());
    }
}

std::string in_dir(const std::string& dir, const char* name)
{
    return (fs::path(dir) / name).string();
}

std::string cv_row(const CvVector& c)
{
    return format_double(c.gradient.x()) + "," + format_double(c.gradient.y()) + "," + format_double(c.gradient.z()) +
           "," + format_double(c.cv.x()) + "," + format_double(c.cv.y()) + "," + format_double(c.cv.z()) + "," +
           (c.defined ? "1" : "0");
}

std::string format_cv_vectors(const std::vector<int>& faces, const std::vector<CvVector>& cv)
{
    std::string out = "face_id,grad_x,grad_y,grad_z,cv_x,cv_y,cv_z,defined\n";
    for (std::size_t i = 0; i < cv.size(); ++i) out += std::to_string(faces[i]) + "," + cv_row(cv[i]) + "\n";
    return out;
}

void read_cv_vectors(const std::string& path, std::size_t num_faces, std::vector<int>& faces,
                     std::vector<CvVector>& cv)
{
    const io::CsvTable t = io::read_csv(path);
    const int cf = t.require_column("face_id", path);
    int cg[3], cc[3];
    const char* gn[3] = {"grad_x", "grad_y", "grad_z"};
    const char* cn[3] = {"cv_x", "cv_y", "cv_z"};
    for (int d = 0; d < 3; ++d) {
        cg[d] = t.require_column(gn[d], path);
        cc[d] = t.require_column(cn[d], path);
    }
    const int cd = t.require_column("defined", path);
    for (const auto& row : t.rows) {
        const long long f = io::parse_int(row[cf], path);
        require(f >= 0 && static_cast<std::size_t>(f) < num_faces, ErrorCode::Parse,
                path + ": face id " + std::to_string(f) + " outside the mesh");
        CvVector c;
        for (int d = 0; d < 3; ++d) {
            c.gradient[d] = io::parse_double(row[cg[d]], path);
            c.cv[d] = io::parse_double(row[cc[d]], path);
        }
        c.defined = io::parse_int(row[cd], path) != 0;
        faces.push_back(static_cast<int>(f));
        cv.push_back(c);
    }
}

std::string percentile_label(int p)
{
    return (p < 10 ? "0" : "") + std::to_string(p);
}

json channel_json(const std::string& name, const MetricsReport& r)
{
    return {{"channel", name}, {"nrmse", number(r.nrmse)},   {"coverage", number(r.coverage)},
            {"n", r.n},        {"excluded", r.excluded}};
}

} // namespace

Observations read_observations_csv(const std::string& path)
{
    const io::CsvTable t = io::read_csv(path);
    const int cv = t.require_column("vertex_id", path);
    const int cl = t.require_column("lat_ms", path);
    const int cs = t.column("sigma_ms");
    Observations obs;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string where = path + " row " + std::to_string(r + 2);
        const long long v = io::parse_int(t.rows[r][cv], where);
        require(v >= 0 && v <= std::numeric_limits<int>::max(), ErrorCode::Parse, where + ": bad vertex id");
        const double lat = io::parse_double(t.rows[r][cl], where);
        const double sigma = cs >= 0 ? io::parse_double(t.rows[r][cs], where) : 0.0;
        require(std::isfinite(lat), ErrorCode::Parse, where + ": LAT must be finite");
        require(std::isfinite(sigma) && sigma >= 0, ErrorCode::Parse, where + ": sigma must be finite and >= 0");
        obs.vertex.push_back(static_cast<int>(v));
        obs.value.push_back(lat);
        obs.sigma.push_back(sigma);
    }
    require(obs.size() > 0, ErrorCode::Parse, path + ": no observations");
    return obs;
}

std::string format_observations_csv(const Observations& obs)
{
    std::string out = "vertex_id,lat_ms,sigma_ms\n";
    for (std::size_t i = 0; i < obs.size(); ++i) {
        out += std::to_string(obs.vertex[i]) + "," + format_double(obs.value[i]) + "," + format_double(obs.sigma[i]) +
               "\n";
    }
    return out;
}

std::string format_model_json(const GpModel& model, const std::string& basis_dir)
{
    json j;
    j["format"] = kModelFormat;
    j["basis_dir"] = basis_dir;
    j["mesh_hash"] = model.basis().mesh_hash;
    j["num_basis"] = model.basis().size();
    j["hyperparams"] = hp_json(model.hyperparams());
    j["standardization"] = {{"mean", model.standardization().mean}, {"sd", model.standardization().sd}};
    j["jitter"] = model.jitter();
    j["log_likelihood"] = number(model.log_likelihood());
    const Observations& obs = model.observations();
    j["observations"] = {{"vertex", obs.vertex}, {"value", obs.value}, {"sigma", obs.sigma}};
    json starts = json::array();
    for (const auto& s : model.diagnostics.starts) {
        starts.push_back({{"start", hp_json(s.start)},
                          {"start_log_likelihood", number(s.start_log_likelihood)},
                          {"result", hp_json(s.result)},
                          {"log_likelihood", number(s.log_likelihood)},
                          {"evaluations", s.evaluations},
                          {"converged", s.converged}});
    }
    j["diagnostics"] = {{"best_start", model.diagnostics.best_start}, {"starts", starts}};
    return j.dump(2) + "\n";
}

void save_model(const GpModel& model, const std::string& basis_dir, const std::string& path)
{
    io::write_file_atomic(path, format_model_json(model, basis_dir));
}

GpModel load_model(const std::string& path)
{
    const json j = parse_json(path);
    try {
        require(j.at("format").get<std::string>() == kModelFormat, ErrorCode::Parse,
                path + ": not a model file (format " + j.at("format").dump() + ")");
        fs::path dir = j.at("basis_dir").get<std::string>();
        if (dir.is_relative()) dir = fs::path(path).parent_path() / dir;
        auto basis = std::make_shared<EigenBasis>(load_basis(dir.string()));
        const std::string hash = j.at("mesh_hash").get<std::string>();
        if (basis->mesh_hash != hash) {
            fail(ErrorCode::StaleCache, path + ": basis in " + dir.string() + " was built on mesh " +
                                            basis->mesh_hash + ", model expects " + hash);
        }
        const int m = j.at("num_basis").get<int>();
        if (m > basis->size()) {
            fail(ErrorCode::StaleCache, path + ": model uses " + std::to_string(m) + " basis functions but " +
                                            dir.string() + " holds " + std::to_string(basis->size()));
        }
        if (m < basis->size()) basis = std::make_shared<EigenBasis>(truncate(*basis, m));

        Observations obs;
        const json& o = j.at("observations");
        obs.vertex = o.at("vertex").get<std::vector<int>>();
        obs.value = o.at("value").get<std::vector<double>>();
        obs.sigma = o.at("sigma").get<std::vector<double>>();
        require(obs.value.size() == obs.size() && obs.sigma.size() == obs.size(), ErrorCode::Parse,
                path + ": observation arrays differ in length");
        Standardization st{j.at("standardization").at("mean").get<double>(),
                           j.at("standardization").at("sd").get<double>()};
        GpModel model(basis, obs, hp_of(j.at("hyperparams")), st, j.at("jitter").get<double>());
        if (j.contains("diagnostics")) {
            const json& d = j.at("diagnostics");
            model.diagnostics.best_start = d.at("best_start").get<int>();
            for (const auto& s : d.at("starts")) {
                FitStart fs;
                fs.start = hp_of(s.at("start"));
                fs.start_log_likelihood = number_of(s.at("start_log_likelihood"));
                fs.result = hp_of(s.at("result"));
                fs.log_likelihood = number_of(s.at("log_likelihood"));
                fs.evaluations = s.at("evaluations").get<int>();
                fs.converged = s.at("converged").get<bool>();
                model.diagnostics.starts.push_back(fs);
            }
        }
        return model;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, path + ": " + e.what());
    }
}

std::string format_prediction_csv(const PosteriorField& vertices, const PosteriorField& centroids)
{
    std::string out = "point_id,kind,mean_ms,sd_ms\n";
    auto rows = [&](const PosteriorField& f, const char* kind) {
        for (Eigen::Index i = 0; i < f.mean.size(); ++i) {
            out += std::to_string(i) + "," + kind + "," + format_double(f.mean[i]) + "," +
                   format_double(std::sqrt(f.variance[i])) + "\n";
        }
    };
    rows(vertices, "vertex");
    rows(centroids, "centroid");
    return out;
}

void save_prediction_vtk(const TriMesh& mesh, const PosteriorField& field, const std::string& path)
{
    VtkWriter w(mesh);
    std::vector<double> sd(static_cast<std::size_t>(field.variance.size()));
    for (std::size_t v = 0; v < sd.size(); ++v) sd[v] = std::sqrt(field.variance[static_cast<Eigen::Index>(v)]);
    w.point_scalars("lat_mean_ms", std::vector<double>(field.mean.data(), field.mean.data() + field.mean.size()));
    w.point_scalars("lat_sd_ms", sd);
    w.save(path);
}

std::string format_cv_csv(const CvSummary& cv)
{
    std::string out = "face_id,grad_mean,grad_sd";
    for (int p : kPercentileRanks) out += ",grad_p" + percentile_label(p);
    for (int p : kPercentileRanks) out += ",cv_p" + percentile_label(p);
    out += ",cv_iqr,cv_dir_x,cv_dir_y,cv_dir_z,undefined\n";
    for (std::size_t i = 0; i < cv.faces.size(); ++i) {
        out += std::to_string(cv.faces[i]) + "," + format_double(cv.grad_mean[i]) + "," + format_double(cv.grad_sd[i]);
        for (double x : cv.grad_pct[i]) out += "," + format_double(x);
        for (double x : cv.cv_pct[i]) out += "," + format_double(x);
        const Vec3& d = cv.cv_mean_direction[i];
        out += "," + format_double(cv.cv_iqr[i]) + "," + format_double(d.x()) + "," + format_double(d.y()) + "," +
               format_double(d.z()) + "," + (cv.undefined[i] ? "1" : "0") + "\n";
    }
    return out;
}

void save_cv_vtk(const TriMesh& mesh, const CvSummary& cv, const std::string& path)
{
    const std::size_t nf = mesh.num_faces();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> grad(nf, nan), sd(nf, nan), median(nf, nan), iqr(nf, nan);
    std::vector<Vec3> dir(nf, Vec3::Zero());
    for (std::size_t i = 0; i < cv.faces.size(); ++i) {
        const auto f = static_cast<std::size_t>(cv.faces[i]);
        require(f < nf, ErrorCode::InvalidArgument, "CV face outside the mesh");
        grad[f] = cv.grad_mean[i];
        sd[f] = cv.grad_sd[i];
        median[f] = cv.cv_pct[i][2];
        iqr[f] = cv.cv_iqr[i];
        dir[f] = cv.cv_mean_direction[i];
    }
    VtkWriter w(mesh);
    w.cell_scalars("grad_mean_ms_per_mm", grad);
    w.cell_scalars("grad_sd_ms_per_mm", sd);
    w.cell_scalars("cv_median_mm_per_ms", median);
    w.cell_scalars("cv_iqr_mm_per_ms", iqr);
    w.cell_vectors("cv_direction", dir);
    w.save(path);
}

void save_truth(const TruthBundle& bundle, const std::string& dir)
{
    const TriMesh& mesh = bundle.mesh;
    const TruthField& t = bundle.truth;
    require(t.lat.size() == mesh.num_vertices() && t.speed.size() == mesh.num_vertices(), ErrorCode::InvalidArgument,
            "truth does not match the mesh");
    fs::create_directories(dir);
    save_mesh(mesh, in_dir(dir, "mesh.ply"), MeshFormat::PlyAscii);

    std::string lat = "vertex_id,lat_ms,speed_mm_per_ms\n";
    for (std::size_t v = 0; v < t.lat.size(); ++v) {
        lat += std::to_string(v) + "," + format_double(t.lat[v]) + "," + format_double(t.speed[v]) + "\n";
    }
    io::write_file_atomic(in_dir(dir, "lat.csv"), lat);
    std::vector<int> all(mesh.num_faces());
    for (std::size_t f = 0; f < all.size(); ++f) all[f] = static_cast<int>(f);
    io::write_file_atomic(in_dir(dir, "element.csv"), format_cv_vectors(all, t.element));
    io::write_file_atomic(in_dir(dir, "wave.csv"), format_cv_vectors(t.wave_sites, t.wave));

    json j;
    j["format"] = kTruthFormat;
    j["mesh_hash"] = mesh_hash(mesh);
    j["sources"] = t.sources;
    j["speed"] = {{"lengthscale", bundle.speed.lengthscale},
                  {"min_speed", bundle.speed.min_speed},
                  {"max_speed", bundle.speed.max_speed},
                  {"seed", bundle.speed.seed}};
    j["num_wave_sites"] = t.wave_sites.size();
    io::write_file_atomic(in_dir(dir, "truth.json"), j.dump(2) + "\n");
}

TruthBundle load_truth(const std::string& dir)
{
    const std::string meta_path = in_dir(dir, "truth.json");
    const json j = parse_json(meta_path);
    TruthBundle b;
    try {
        require(j.at("format").get<std::string>() == kTruthFormat, ErrorCode::Parse,
                meta_path + ": not a truth directory");
        b.mesh = load_mesh(in_dir(dir, "mesh.ply"));
        if (mesh_hash(b.mesh) != j.at("mesh_hash").get<std::string>()) {
            fail(ErrorCode::StaleCache, dir + ": mesh.ply does not match the recorded mesh hash");
        }
        b.truth.sources = j.at("sources").get<std::vector<int>>();
        const json& s = j.at("speed");
        b.speed.lengthscale = s.at("lengthscale").get<double>();
        b.speed.min_speed = s.at("min_speed").get<double>();
        b.speed.max_speed = s.at("max_speed").get<double>();
        b.speed.seed = s.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, meta_path + ": " + e.what());
    }

    const std::string lat_path = in_dir(dir, "lat.csv");
    const io::CsvTable t = io::read_csv(lat_path);
    require(t.rows.size() == b.mesh.num_vertices(), ErrorCode::Parse,
            lat_path + ": expected one row per vertex (" + std::to_string(b.mesh.num_vertices()) + ")");
    const int cv = t.require_column("vertex_id", lat_path);
    const int cl = t.require_column("lat_ms", lat_path);
    const int cs = t.require_column("speed_mm_per_ms", lat_path);
    b.truth.lat.assign(b.mesh.num_vertices(), 0.0);
    b.truth.speed.assign(b.mesh.num_vertices(), 0.0);
    for (const auto& row : t.rows) {
        const long long v = io::parse_int(row[cv], lat_path);
        require(v >= 0 && static_cast<std::size_t>(v) < b.mesh.num_vertices(), ErrorCode::Parse,
                lat_path + ": vertex id out of range");
        b.truth.lat[v] = io::parse_double(row[cl], lat_path);
        b.truth.speed[v] = io::parse_double(row[cs], lat_path);
    }
    std::vector<int> element_faces;
    read_cv_vectors(in_dir(dir, "element.csv"), b.mesh.num_faces(), element_faces, b.truth.element);
    require(b.truth.element.size() == b.mesh.num_faces(), ErrorCode::Parse, dir + ": element.csv needs every face");
    read_cv_vectors(in_dir(dir, "wave.csv"), b.mesh.num_faces(), b.truth.wave_sites, b.truth.wave);
    return b;
}

std::string validation_report(const std::string& prediction_csv, const std::string& truth_dir,
                              const std::string& quantity)
{
    const TruthBundle b = load_truth(truth_dir);
    const io::CsvTable t = io::read_csv(prediction_csv);
    json report;
    report["quantity"] = quantity;
    report["prediction"] = prediction_csv;
    report["prediction_hash"] = io::file_hash(prediction_csv);
    json channels = json::array();

    if (quantity == "lat") {
        const int cv = t.require_column("point_id", prediction_csv);
        const int ck = t.require_column("kind", prediction_csv);
        const int cm = t.require_column("mean_ms", prediction_csv);
        const int cs = t.require_column("sd_ms", prediction_csv);
        std::vector<double> mean, var, truth;
        for (const auto& row : t.rows) {
            if (row[ck] != "vertex") continue;
            const long long v = io::parse_int(row[cv], prediction_csv);
            require(v >= 0 && static_cast<std::size_t>(v) < b.mesh.num_vertices(), ErrorCode::Parse,
                    prediction_csv + ": vertex id " + std::to_string(v) + " outside the truth mesh");
            mean.push_back(io::parse_double(row[cm], prediction_csv));
            const double sd = io::parse_double(row[cs], prediction_csv);
            var.push_back(sd * sd);
            truth.push_back(b.truth.lat[v]);
        }
        channels.push_back(channel_json("lat", score_lat(mean, var, truth)));
    } else if (quantity == "gradmag") {
        const int cf = t.require_column("face_id", prediction_csv);
        const int cm = t.require_column("grad_mean", prediction_csv);
        const int cs = t.require_column("grad_sd", prediction_csv);
        std::map<int, std::pair<double, double>> pred;
        for (const auto& row : t.rows) {
            const long long f = io::parse_int(row[cf], prediction_csv);
            require(f >= 0 && static_cast<std::size_t>(f) < b.mesh.num_faces(), ErrorCode::Parse,
                    prediction_csv + ": face id " + std::to_string(f) + " outside the truth mesh");
            pred[static_cast<int>(f)] = {io::parse_double(row[cm], prediction_csv),
                                         io::parse_double(row[cs], prediction_csv)};
        }
        auto score = [&](const std::vector<int>& faces, const std::vector<CvVector>& truth_cv) {
            std::vector<double> mean, sd, truth;
            for (std::size_t i = 0; i < faces.size(); ++i) {
                auto it = pred.find(faces[i]);
                if (it == pred.end()) continue;
                mean.push_back(it->second.first);
                sd.push_back(it->second.second);
                truth.push_back(truth_cv[i].gradient.norm());
            }
            return score_gradient_magnitude(mean, sd, truth);
        };
        std::vector<int> all(b.mesh.num_faces());
        for (std::size_t f = 0; f < all.size(); ++f) all[f] = static_cast<int>(f);
        channels.push_back(channel_json("element", score(all, b.truth.element)));
        if (!b.truth.wave_sites.empty()) channels.push_back(channel_json("wave", score(b.truth.wave_sites, b.truth.wave)));
    } else {
        fail(ErrorCode::InvalidArgument, "quantity must be 'lat' or 'gradmag' (got '" + quantity + "')");
    }
    report["channels"] = channels;
    return report.dump(2) + "\n";
}

} // namespace gpmi
