#include <gpmi/error.hpp>
#include <gpmi/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gpmi {

double nrmse(const std::vector<double>& pred, const std::vector<double>& truth)
{
    require(pred.size() == truth.size(), ErrorCode::InvalidArgument, "prediction and truth differ in length");
    require(truth.size() >= 2, ErrorCode::InvalidArgument, "nRMSE needs at least 2 points");
    const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
    const double range = *hi - *lo;
    require(range > 0, ErrorCode::InvalidArgument, "truth has zero range");
    double ss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    return 100.0 / range * std::sqrt(ss / static_cast<double>(pred.size()));
}

IseResult ise(const std::vector<double>& pred, const std::vector<double>& variance, const std::vector<double>& truth)
{
    require(pred.size() == truth.size() && variance.size() == truth.size(), ErrorCode::InvalidArgument,
            "prediction, variance and truth differ in length");
    IseResult out;
    out.ise.resize(pred.size());
    std::size_t inside = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!(variance[i] > 0)) {
            out.ise[i] = std::nan("");
            ++out.excluded;
            continue;
        }
        out.ise[i] = (pred[i] - truth[i]) / std::sqrt(variance[i]);
        ++out.scored;
        if (std::abs(out.ise[i]) <= 2.0) ++inside;
    }
    require(out.scored > 0, ErrorCode::InvalidArgument, "all predictive variances are zero");
    out.coverage = 100.0 * static_cast<double>(inside) / static_cast<double>(out.scored);
    return out;
}

namespace {

MetricsReport report(std::string quantity, const std::vector<double>& mean, const std::vector<double>& variance,
                     const std::vector<double>& truth)
{
    MetricsReport r;
    r.quantity = std::move(quantity);
    r.nrmse = nrmse(mean, truth);
    IseResult s = ise(mean, variance, truth);
    r.coverage = s.coverage;
    r.n = truth.size();
    r.excluded = s.excluded;
    r.ise = std::move(s.ise);
    return r;
}

} // namespace

MetricsReport score_lat(const std::vector<double>& mean, const std::vector<double>& variance,
                        const std::vector<double>& truth)
{
    return report("lat", mean, variance, truth);
}

MetricsReport score_gradient_magnitude(const std::vector<double>& mean_magnitude,
                                       const std::vector<double>& sampled_sd, const std::vector<double>& truth)
{
    require(sampled_sd.size() == mean_magnitude.size(), ErrorCode::InvalidArgument,
            "magnitude and SD differ in length");
    std::vector<double> variance(sampled_sd.size());
    for (std::size_t i = 0; i < variance.size(); ++i) variance[i] = sampled_sd[i] * sampled_sd[i];
    return report("gradmag", mean_magnitude, variance, truth);
}

namespace {

std::vector<double> ranks(const std::vector<double>& x)
{
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

} // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y)
{
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument, "Spearman needs paired data");
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    require(sxx > 0 && syy > 0, ErrorCode::InvalidArgument, "Spearman undefined for constant data");
    return sxy / std::sqrt(sxx * syy);
}

} // namespace gpmi
