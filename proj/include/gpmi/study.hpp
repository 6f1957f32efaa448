#pragma once

#include <gpmi/basis.hpp>
#include <gpmi/gp.hpp>
#include <gpmi/virtual_patient.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace gpmi {

struct StudyConfig
{
    std::vector<int> counts = {50, 100, 250, 500, 750, 1000};
    int repeats = 10;
    double noise_sd = 1.0;
    /// Basis size used for fitting; the full basis may be larger.
    int fit_basis = 256;
    int wave_sites = 1000;
    int designs = 10000;
    int samples = 2000;
    int wave_k = 20;
    std::uint64_t seed = 0;
    SpeedParams speed;
    /// Empty selects vertex 0.
    std::vector<int> sources;
    double exact_radius = 0.0;
    FitConfig fit;
};

struct StudyRow
{
    int n = 0;
    double lat_nrmse = 0.0;
    double lat_coverage = 0.0;
    double wave_nrmse = 0.0;
    double wave_coverage = 0.0;
    double element_nrmse = 0.0;
    double element_coverage = 0.0;
    /// Spearman correlation of 1/|grad LAT| against CV IQR, averaged over repeats.
    double spearman_cv_iqr = 0.0;
    double mean_lengthscale = 0.0;
};

struct StudyResult
{
    std::vector<StudyRow> rows;
    TruthField truth;
    /// Explained variance of the first fit_basis functions under a fit with
    /// the full basis (largest n, first repeat).
    double explained_at_fit_basis = 0.0;
    Eigen::VectorXd explained_curve;
    Hyperparams full_basis_fit;
};

/// Averaged accuracy/coverage protocol on an eikonal virtual patient.
/// `basis` must cover `mesh` and hold at least `config.fit_basis` functions.
StudyResult run_study(std::shared_ptr<const EigenBasis> basis, const StudyConfig& config,
                      const std::function<void(const std::string&)>& progress = {});

std::string format_study_csv(const std::vector<StudyRow>& rows);

} // namespace gpmi
