#include <gpmi/eigensolver.hpp>
#include <gpmi/error.hpp>

#include <arpackdef.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

extern "C" {
void dsaupd_c(a_int* ido, char const* bmat, a_int n, char const* which, a_int nev, double tol, double* resid,
              a_int ncv, double* v, a_int ldv, a_int* iparam, a_int* ipntr, double* workd, double* workl,
              a_int lworkl, a_int* info);
void dseupd_c(a_int rvec, char const* howmny, a_int const* select, double* d, double* z, a_int ldz, double sigma,
              char const* bmat, a_int n, char const* which, a_int nev, double tol, double* resid, a_int ncv,
              double* v, a_int ldv, a_int* iparam, a_int* ipntr, double* workd, double* workl, a_int lworkl,
              a_int* info);
}

namespace gpmi {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Standard-form eigenpairs of C = A^-1/2 L A^-1/2.
struct StandardPairs
{
    VectorXd values;
    MatrixXd vectors;
};

StandardPairs dense_pairs(const LaplacianSystem& sys, int count)
{
    const VectorXd s = sys.mass.cwiseSqrt().cwiseInverse();
    MatrixXd c = MatrixXd(sys.L);
    c = s.asDiagonal() * c * s.asDiagonal();
    c = 0.5 * (c + c.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(c);
    if (eig.info() != Eigen::Success) fail(ErrorCode::Convergence, "dense eigensolver failed");
    return {eig.eigenvalues().head(count), eig.eigenvectors().leftCols(count)};
}

StandardPairs arpack_pairs(const LaplacianSystem& sys, int count, double tol)
{
    const Index n = sys.L.rows();
    const double area = sys.mass.sum();
    // Below the spectrum, so L - sigma A is positive definite.
    const double sigma = -2.0 * M_PI / area;

    Eigen::SparseMatrix<double> k = sys.L;
    for (Index i = 0; i < n; ++i) k.coeffRef(i, i) -= sigma * sys.mass[i];
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol;
    chol.compute(k);
    if (chol.info() != Eigen::Success) fail(ErrorCode::Numeric, "factorization of shifted Laplacian failed");
    const VectorXd sqrt_mass = sys.mass.cwiseSqrt();

    const a_int nev = count;
    const a_int ncv = static_cast<a_int>(std::min<Index>(n, std::max(2 * count + 1, count + 20)));
    const a_int lworkl = ncv * (ncv + 8);
    std::vector<double> resid(n), v(static_cast<std::size_t>(n) * ncv), workd(3 * n), workl(lworkl);
    a_int iparam[11] = {0}, ipntr[11] = {0};
    iparam[0] = 1;
    iparam[2] = 10000;
    iparam[6] = 3;

    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto& r : resid) r = 1.0 + 0.5 * uni(rng);

    a_int ido = 0;
    a_int info = 1;
    VectorXd tmp(n);
    for (;;) {
        dsaupd_c(&ido, "I", static_cast<a_int>(n), "LM", nev, tol, resid.data(), ncv, v.data(),
                 static_cast<a_int>(n), iparam, ipntr, workd.data(), workl.data(), lworkl, &info);
        if (ido == -1 || ido == 1) {
            Eigen::Map<const VectorXd> x(workd.data() + ipntr[0] - 1, n);
            Eigen::Map<VectorXd> y(workd.data() + ipntr[1] - 1, n);
            tmp = sqrt_mass.cwiseProduct(x);
            tmp = chol.solve(tmp);
            y = sqrt_mass.cwiseProduct(tmp);
        } else {
            break;
        }
    }
    if (info < 0) fail(ErrorCode::Convergence, "ARPACK dsaupd failed with code " + std::to_string(info));
    if (info == 1) {
        fail(ErrorCode::Convergence, "eigensolver did not converge: " + std::to_string(iparam[4]) + " of " +
                                         std::to_string(count) + " eigenpairs after " + std::to_string(iparam[2]) +
                                         " restarts");
    }

    std::vector<a_int> select(ncv, 1);
    VectorXd d(nev);
    MatrixXd z(n, nev);
    dseupd_c(1, "A", select.data(), d.data(), z.data(), static_cast<a_int>(n), sigma, "I", static_cast<a_int>(n),
             "LM", nev, tol, resid.data(), ncv, v.data(), static_cast<a_int>(n), iparam, ipntr, workd.data(),
             workl.data(), lworkl, &info);
    if (info != 0) fail(ErrorCode::Convergence, "ARPACK dseupd failed with code " + std::to_string(info));
    return {d, z};
}

} // namespace

EigenPairs smallest_eigenpairs(const LaplacianSystem& sys, int count, const EigenOptions& options)
{
    const Index n = sys.L.rows();
    require(count >= 1 && count <= n, ErrorCode::InvalidArgument,
            "number of eigenpairs must be in [1, " + std::to_string(n) + "], got " + std::to_string(count));

    StandardPairs sp = (n <= options.dense_limit || 2 * count + 1 >= n) ? dense_pairs(sys, count)
                                                                         : arpack_pairs(sys, count, options.ritz_tolerance);

    std::vector<Index> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return sp.values[a] < sp.values[b]; });

    EigenPairs out;
    out.values.resize(count);
    out.vectors.resize(n, count);
    const VectorXd inv_sqrt_mass = sys.mass.cwiseSqrt().cwiseInverse();
    for (int k = 0; k < count; ++k) {
        VectorXd x = sp.vectors.col(order[k]);
        x.normalize();
        VectorXd phi = inv_sqrt_mass.cwiseProduct(x);
        const double tol = 1e-8 * phi.cwiseAbs().maxCoeff();
        for (Index i = 0; i < n; ++i) {
            if (std::abs(phi[i]) > tol) {
                if (phi[i] < 0) phi = -phi;
                break;
            }
        }
        out.values[k] = sp.values[order[k]];
        out.vectors.col(k) = phi;
    }

    for (int k = 0; k < count; ++k) {
        const VectorXd aphi = sys.mass.cwiseProduct(out.vectors.col(k));
        const VectorXd r = sys.L * out.vectors.col(k) - out.values[k] * aphi;
        out.max_residual = std::max(out.max_residual, r.norm() / aphi.norm());
    }
    if (!(out.max_residual <= options.residual_limit)) {
        std::ostringstream os;
        os << "eigenpairs not accurate: max residual " << out.max_residual;
        fail(ErrorCode::Convergence, os.str());
    }
    return out;
}

} // namespace gpmi
