#pragma once

#include <gpmi/laplacian.hpp>

#include <Eigen/Core>

namespace gpmi {

struct EigenPairs
{
    /// Ascending eigenvalues of L phi = lambda A phi.
    Eigen::VectorXd values;
    /// Mass-orthonormal eigenvectors, one per column.
    Eigen::MatrixXd vectors;
    /// max_k |L phi_k - lambda_k A phi_k| / |A phi_k|
    double max_residual = 0.0;
};

struct EigenOptions
{
    /// Systems up to this size are solved densely.
    int dense_limit = 1200;
    /// Residual above which the solve is reported as failed.
    double residual_limit = 1e-7;
    /// Relative Ritz tolerance passed to the Lanczos iteration (0 means
    /// machine precision).
    double ritz_tolerance = 1e-10;
};

/// The `count` smallest eigenpairs of the generalized problem. Each
/// eigenvector is signed so its first entry of non-negligible magnitude is
/// positive.
EigenPairs smallest_eigenpairs(const LaplacianSystem& sys, int count, const EigenOptions& options = {});

} // namespace gpmi
