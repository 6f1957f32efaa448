#include <gpmi/error.hpp>
#include <gpmi/fast_marching.hpp>
#include <gpmi/graph.hpp>
#include <gpmi/virtual_patient.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace gpmi {

std::vector<double> sample_speed_field(const EigenBasis& basis, const SpeedParams& params)
{
    require(params.min_speed >= 0.1, ErrorCode::InvalidArgument, "minimum speed must be >= 0.1 mm/ms");
    require(params.max_speed >= params.min_speed, ErrorCode::InvalidArgument, "maximum speed below minimum");
    require(params.max_speed <= 20.0 * params.min_speed, ErrorCode::InvalidArgument,
            "speed ratio max/min must not exceed 20");
    require(params.lengthscale > 0, ErrorCode::InvalidArgument, "speed lengthscale must be positive");
    const auto nv = static_cast<std::size_t>(basis.phi_v.rows());
    if (params.max_speed == params.min_speed) return std::vector<double>(nv, params.min_speed);

    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(basis.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
    const Eigen::VectorXd w = spectral_weights(basis.lambdas, Smoothness::ThreeHalves, params.lengthscale).cwiseSqrt();
    const Eigen::VectorXd g = basis.phi_v * w.cwiseProduct(z);

    const double mean = g.mean();
    const double sd = std::sqrt((g.array() - mean).square().mean());
    std::vector<double> speed(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        const double s = sd > 0 ? (g[static_cast<Eigen::Index>(v)] - mean) / sd : 0.0;
        const double squash = 1.0 / (1.0 + std::exp(-s));
        speed[v] = params.min_speed + (params.max_speed - params.min_speed) * squash;
    }
    return speed;
}

TruthField simulate_truth(const TriMesh& mesh, const std::vector<double>& speed, const std::vector<int>& sources,
                          const TruthOptions& options)
{
    TruthField truth;
    truth.speed = speed;
    truth.sources = sources;
    truth.lat = eikonal_times(mesh, speed, sources, options.exact_radius);
    truth.element = element_cv_all(mesh, truth.lat);
    if (options.wave_all_faces && options.wave_sites.empty()) {
        truth.wave_sites.resize(mesh.num_faces());
        std::iota(truth.wave_sites.begin(), truth.wave_sites.end(), 0);
    } else {
        truth.wave_sites = options.wave_sites;
    }
    if (!truth.wave_sites.empty()) {
        const WaveCvEstimator wave(mesh, options.wave_k);
        truth.wave = wave.at_faces(truth.wave_sites, truth.lat);
    }
    return truth;
}

std::vector<int> select_wave_sites(const TriMesh& mesh, int count, int designs, std::uint64_t seed)
{
    require(count >= 1, ErrorCode::InvalidArgument, "wave site count must be >= 1");
    std::vector<int> faces(mesh.num_faces());
    std::iota(faces.begin(), faces.end(), 0);
    if (static_cast<std::size_t>(count) >= faces.size()) return faces;
    return maximin_select(WeightedGraph::dual_of(mesh), faces, count, designs, seed);
}

SamplingMode parse_sampling_mode(const std::string& text)
{
    if (text == "random") return SamplingMode::Random;
    if (text == "maximin") return SamplingMode::Maximin;
    fail(ErrorCode::InvalidArgument, "sampling mode must be 'random' or 'maximin' (got '" + text + "')");
}

Observations sample_observations(const TriMesh& mesh, const std::vector<double>& lat, int n, double noise_sd,
                                 SamplingMode mode, std::uint64_t seed, int designs)
{
    require(lat.size() == mesh.num_vertices(), ErrorCode::InvalidArgument, "LAT must have one value per vertex");
    require(n >= 1 && static_cast<std::size_t>(n) <= lat.size(), ErrorCode::InvalidArgument,
            "observation count must be between 1 and the vertex count");
    require(noise_sd >= 0 && std::isfinite(noise_sd), ErrorCode::InvalidArgument, "noise SD must be >= 0");

    std::mt19937_64 rng(seed);
    std::vector<int> chosen;
    if (mode == SamplingMode::Random) {
        std::vector<int> pool(lat.size());
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < n; ++i) {
            std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
        }
        chosen.assign(pool.begin(), pool.begin() + n);
    } else {
        std::vector<int> all(lat.size());
        std::iota(all.begin(), all.end(), 0);
        chosen = maximin_select(WeightedGraph::from_mesh(mesh), all, n, designs, rng());
    }

    std::normal_distribution<double> noise(0.0, 1.0);
    Observations obs;
    for (int v : chosen) {
        obs.vertex.push_back(v);
        obs.value.push_back(lat[v] + noise_sd * noise(rng));
        obs.sigma.push_back(noise_sd);
    }
    return obs;
}

} // namespace gpmi
