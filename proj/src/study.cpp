#include <gpmi/cv.hpp>
#include <gpmi/error.hpp>
#include <gpmi/io.hpp>
#include <gpmi/metrics.hpp>
#include <gpmi/study.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gpmi {

StudyResult run_study(std::shared_ptr<const EigenBasis> basis, const StudyConfig& config,
                      const std::function<void(const std::string&)>& progress)
{
    require(basis != nullptr, ErrorCode::InvalidArgument, "study needs a basis");
    require(config.repeats >= 1, ErrorCode::InvalidArgument, "study needs at least one repeat");
    require(!config.counts.empty(), ErrorCode::InvalidArgument, "study needs observation counts");
    auto say = [&](const std::string& msg) {
        if (progress) progress(msg);
    };
    const TriMesh& mesh = basis->mesh;
    const int fit_m = std::min(config.fit_basis, basis->size());
    auto fit_basis = std::make_shared<const EigenBasis>(truncate(*basis, fit_m));

    SpeedParams speed = config.speed;
    speed.seed = mix_seed(config.seed, 1);
    StudyResult result;
    std::vector<int> sources = config.sources.empty() ? std::vector<int>{0} : config.sources;

    // Ground truth: element CV everywhere, wave CV at well-spaced centroids.
    TruthOptions topt;
    topt.wave_k = config.wave_k;
    topt.exact_radius = config.exact_radius;
    topt.wave_all_faces = false;
    topt.wave_sites = select_wave_sites(mesh, config.wave_sites, config.designs, mix_seed(config.seed, 2));
    result.truth = simulate_truth(mesh, sample_speed_field(*basis, speed), sources, topt);
    say("truth ready: LAT range " + io::format_double(*std::max_element(result.truth.lat.begin(), result.truth.lat.end())) +
        " ms");

    std::vector<double> element_truth(mesh.num_faces());
    for (std::size_t f = 0; f < element_truth.size(); ++f) element_truth[f] = result.truth.element[f].gradient.norm();
    std::vector<double> wave_truth(result.truth.wave_sites.size());
    for (std::size_t i = 0; i < wave_truth.size(); ++i) wave_truth[i] = result.truth.wave[i].gradient.norm();

    Observations largest;
    for (int n : config.counts) {
        StudyRow row;
        row.n = n;
        for (int r = 0; r < config.repeats; ++r) {
            const std::uint64_t stream = 1000ULL * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(r);
            const Observations obs = sample_observations(mesh, result.truth.lat, n, config.noise_sd, SamplingMode::Random,
                                                         mix_seed(config.seed, 3 + 2 * stream));
            if (n == config.counts.back() && r == 0) largest = obs;
            FitConfig fc = config.fit;
            fc.seed = mix_seed(config.seed, 4 + 2 * stream);
            const GpModel model = fit_hyperparameters(fit_basis, obs, fc);

            const PosteriorField lat = model.posterior_all_vertices();
            const MetricsReport lat_report =
                score_lat(std::vector<double>(lat.mean.data(), lat.mean.data() + lat.mean.size()),
                          std::vector<double>(lat.variance.data(), lat.variance.data() + lat.variance.size()),
                          result.truth.lat);

            const CvSummary cv = sample_cv(model.posterior_gradient_all(), config.samples, mix_seed(config.seed, stream));
            const MetricsReport element_report = score_gradient_magnitude(cv.grad_mean, cv.grad_sd, element_truth);
            std::vector<double> site_mean, site_sd;
            for (int f : result.truth.wave_sites) {
                site_mean.push_back(cv.grad_mean[f]);
                site_sd.push_back(cv.grad_sd[f]);
            }
            const MetricsReport wave_report = score_gradient_magnitude(site_mean, site_sd, wave_truth);

            std::vector<double> inv_grad, iqr;
            for (std::size_t f = 0; f < cv.faces.size(); ++f) {
                if (cv.grad_mean[f] > 0 && std::isfinite(cv.cv_iqr[f])) {
                    inv_grad.push_back(1.0 / cv.grad_mean[f]);
                    iqr.push_back(cv.cv_iqr[f]);
                }
            }
            row.lat_nrmse += lat_report.nrmse;
            row.lat_coverage += lat_report.coverage;
            row.element_nrmse += element_report.nrmse;
            row.element_coverage += element_report.coverage;
            row.wave_nrmse += wave_report.nrmse;
            row.wave_coverage += wave_report.coverage;
            row.spearman_cv_iqr += spearman(inv_grad, iqr);
            row.mean_lengthscale += model.hyperparams().lengthscale;
            say("n=" + std::to_string(n) + " repeat " + std::to_string(r) + ": LAT nRMSE " +
                io::format_double(lat_report.nrmse) + "%, coverage " + io::format_double(lat_report.coverage) +
                "%, l=" + io::format_double(model.hyperparams().lengthscale));
        }
        const double k = config.repeats;
        row.lat_nrmse /= k;
        row.lat_coverage /= k;
        row.element_nrmse /= k;
        row.element_coverage /= k;
        row.wave_nrmse /= k;
        row.wave_coverage /= k;
        row.spearman_cv_iqr /= k;
        row.mean_lengthscale /= k;
        result.rows.push_back(row);
    }

    FitConfig fc = config.fit;
    fc.seed = mix_seed(config.seed, 5);
    const GpModel full = fit_hyperparameters(basis, largest, fc);
    result.full_basis_fit = full.hyperparams();
    result.explained_curve = explained_variance(basis->lambdas, full.hyperparams());
    result.explained_at_fit_basis = result.explained_curve[fit_m - 1];
    return result;
}

std::string format_study_csv(const std::vector<StudyRow>& rows)
{
    using io::format_double;
    std::string out = "n,lat_nrmse,lat_coverage,wave_nrmse,wave_coverage,element_nrmse,element_coverage\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + format_double(r.lat_nrmse) + "," + format_double(r.lat_coverage) + "," +
               format_double(r.wave_nrmse) + "," + format_double(r.wave_coverage) + "," +
               format_double(r.element_nrmse) + "," + format_double(r.element_coverage) + "\n";
    }
    return out;
}

} // namespace gpmi
