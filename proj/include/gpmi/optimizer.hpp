#pragma once

#include <Eigen/Core>

#include <functional>

namespace gpmi {

struct NelderMeadOptions
{
    int max_evaluations = 600;
    /// Stop when the simplex spread in function value and in every coordinate
    /// falls below these tolerances.
    double f_tolerance = 1e-9;
    double x_tolerance = 1e-7;
    /// Initial simplex edge as a fraction of each bound width.
    double initial_step = 0.1;
};

struct NelderMeadResult
{
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Minimizes f inside the box [lower, upper] (points are clamped to the box).
/// Non-finite values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& start,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             const NelderMeadOptions& options = {});

} // namespace gpmi
