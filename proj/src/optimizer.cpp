#include <gpmi/optimizer.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace gpmi {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& start,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             const NelderMeadOptions& options)
{
    const Eigen::Index d = start.size();
    NelderMeadResult result;
    auto clamp = [&](Eigen::VectorXd x) { return x.cwiseMax(lower).cwiseMin(upper).eval(); };
    auto eval = [&](const Eigen::VectorXd& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<Eigen::VectorXd> simplex(d + 1);
    std::vector<double> values(d + 1);
    simplex[0] = clamp(start);
    for (Eigen::Index i = 0; i < d; ++i) {
        Eigen::VectorXd x = simplex[0];
        const double step = options.initial_step * (upper[i] - lower[i]);
        x[i] += (x[i] + step <= upper[i]) ? step : -step;
        simplex[i + 1] = clamp(x);
    }
    for (Eigen::Index i = 0; i <= d; ++i) values[i] = eval(simplex[i]);

    std::vector<Eigen::Index> order(d + 1);
    while (result.evaluations < options.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
        {
            std::vector<Eigen::VectorXd> s(d + 1);
            std::vector<double> v(d + 1);
            for (Eigen::Index i = 0; i <= d; ++i) {
                s[i] = simplex[order[i]];
                v[i] = values[order[i]];
            }
            simplex = std::move(s);
            values = std::move(v);
        }

        double x_spread = 0.0;
        for (Eigen::Index i = 1; i <= d; ++i) x_spread = std::max(x_spread, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
        if (std::isfinite(values[d]) && values[d] - values[0] <= options.f_tolerance * (1.0 + std::abs(values[0])) &&
            x_spread <= options.x_tolerance) {
            result.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
        for (Eigen::Index i = 0; i < d; ++i) centroid += simplex[i];
        centroid /= static_cast<double>(d);

        const Eigen::VectorXd reflected = clamp(centroid + (centroid - simplex[d]));
        const double fr = eval(reflected);
        if (fr < values[0]) {
            const Eigen::VectorXd expanded = clamp(centroid + 2.0 * (centroid - simplex[d]));
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[d] = expanded;
                values[d] = fe;
            } else {
                simplex[d] = reflected;
                values[d] = fr;
            }
            continue;
        }
        if (fr < values[d - 1]) {
            simplex[d] = reflected;
            values[d] = fr;
            continue;
        }
        const bool outside = fr < values[d];
        const Eigen::VectorXd contracted =
            outside ? clamp(centroid + 0.5 * (reflected - centroid)) : clamp(centroid + 0.5 * (simplex[d] - centroid));
        const double fc = eval(contracted);
        if (fc < (outside ? fr : values[d])) {
            simplex[d] = contracted;
            values[d] = fc;
            continue;
        }
        for (Eigen::Index i = 1; i <= d; ++i) {
            simplex[i] = clamp(simplex[0] + 0.5 * (simplex[i] - simplex[0]));
            values[i] = eval(simplex[i]);
        }
    }

    const auto best = std::min_element(values.begin(), values.end()) - values.begin();
    result.x = simplex[best];
    result.value = values[best];
    return result;
}

} // namespace gpmi
