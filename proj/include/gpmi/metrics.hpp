#pragma once

#include <string>
#include <vector>

namespace gpmi {

/// Root mean square error as a percentage of the truth range.
double nrmse(const std::vector<double>& pred, const std::vector<double>& truth);

struct IseResult
{
    /// Standardized residual per point; NaN where the variance is zero.
    std::vector<double> ise;
    /// Percentage of scored points with |ISE| <= 2.
    double coverage = 0.0;
    std::size_t scored = 0;
    std::size_t excluded = 0;
};

IseResult ise(const std::vector<double>& pred, const std::vector<double>& variance, const std::vector<double>& truth);

struct MetricsReport
{
    std::string quantity;
    double nrmse = 0.0;
    double coverage = 0.0;
    std::size_t n = 0;
    std::size_t excluded = 0;
    std::vector<double> ise;
};

/// LAT scoring from posterior means and variances.
MetricsReport score_lat(const std::vector<double>& mean, const std::vector<double>& variance,
                        const std::vector<double>& truth);

/// |grad LAT| scoring: the magnitude of the posterior mean gradient is the
/// prediction and the SD of sampled magnitudes its uncertainty.
MetricsReport score_gradient_magnitude(const std::vector<double>& mean_magnitude,
                                       const std::vector<double>& sampled_sd, const std::vector<double>& truth);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

} // namespace gpmi
