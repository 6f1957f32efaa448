#pragma once

#include <gpmi/basis.hpp>

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace gpmi {

enum class Smoothness { Half, ThreeHalves, FiveHalves };

double smoothness_value(Smoothness nu);
Smoothness parse_smoothness(const std::string& text);
std::string to_string(Smoothness nu);

struct Hyperparams
{
    Smoothness nu = Smoothness::ThreeHalves;
    /// Length-scale in mm.
    double lengthscale = 10.0;
    /// Marginal variance in standardized units.
    double tau2 = 1.0;
    /// Nugget in standardized variance units.
    double eta = 0.0;
};

/// Matérn spectral density for a D-dimensional domain at angular frequency
/// omega (mm^-1), with unit marginal variance.
double matern_spectral_density(double omega, Smoothness nu, double lengthscale, int dim = 2);

/// Closed-form Matérn covariance with unit variance at distance r.
double matern_kernel(double r, Smoothness nu, double lengthscale);

/// S(sqrt(lambda_k)) for every eigenvalue.
Eigen::VectorXd spectral_weights(const Eigen::VectorXd& lambdas, Smoothness nu, double lengthscale);

/// Cumulative percentage of spectral mass captured by the first m functions.
Eigen::VectorXd explained_variance(const Eigen::VectorXd& lambdas, const Hyperparams& hp);

/// tau2 * Phi_a diag(S) Phi_b^T
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& phi_a, const Eigen::MatrixXd& phi_b,
                              const Eigen::VectorXd& lambdas, const Hyperparams& hp);

struct Observations
{
    std::vector<int> vertex;
    /// LAT in ms.
    std::vector<double> value;
    /// Noise standard deviation in ms.
    std::vector<double> sigma;

    std::size_t size() const { return vertex.size(); }
};

/// Combines repeated vertices by precision-weighted averaging. Zero-noise
/// duplicates dominate: they are averaged among themselves and stay exact.
/// The result is sorted by vertex.
Observations merge_duplicates(const Observations& obs);

struct Standardization
{
    double mean = 0.0;
    double sd = 1.0;
};

/// Mean and population standard deviation; a zero spread maps to sd = 1.
Standardization standardization_of(const std::vector<double>& values);

struct PosteriorField
{
    /// ms
    Eigen::VectorXd mean;
    /// ms^2
    Eigen::VectorXd variance;
};

struct GradientPosterior
{
    std::vector<int> faces;
    /// ms/mm
    std::vector<Vec3> mean;
    /// (ms/mm)^2
    std::vector<Eigen::Matrix3d> cov;
};

/// Fitting options. Bounds left at zero are derived from the mesh.
struct FitConfig
{
    Smoothness nu = Smoothness::ThreeHalves;
    int starts = 8;
    std::uint64_t seed = 0;
    double jitter = 1e-8;
    double lengthscale_min = 0.0;
    double lengthscale_max = 0.0;
    double tau2_min = 0.1;
    double tau2_max = 10.0;
    double eta_min = 1e-6;
    double eta_max = 1.0;
    int max_evaluations = 600;
};

struct FitStart
{
    Hyperparams start;
    double start_log_likelihood = 0.0;
    Hyperparams result;
    double log_likelihood = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct FitDiagnostics
{
    std::vector<FitStart> starts;
    int best_start = -1;
};

/// Log marginal likelihood of standardized data as a function of the
/// hyperparameters. Observations sharing a noise level are grouped so each
/// evaluation costs O(M^3) regardless of the number of observations.
class LikelihoodEvaluator
{
public:
    LikelihoodEvaluator(const EigenBasis& basis, const Observations& obs, const Standardization& st,
                        double jitter = 1e-8);

    double operator()(const Hyperparams& hp) const;

private:
    struct Group
    {
        double noise = 0.0;
        double count = 0.0;
        double yy = 0.0;
        Eigen::MatrixXd gram;
        Eigen::VectorXd proj;
    };
    const Eigen::VectorXd* m_lambdas;
    std::vector<Group> m_groups;
    double m_jitter;
};

/// Reduced-rank GP conditioned on observations. Immutable once built.
class GpModel
{
public:
    /// Conditions on `obs` (merged and standardized internally).
    GpModel(std::shared_ptr<const EigenBasis> basis, const Observations& obs, const Hyperparams& hp,
            double jitter = 1e-8);
    /// Prior model with the given standardization and no data.
    GpModel(std::shared_ptr<const EigenBasis> basis, const Hyperparams& hp, const Standardization& st);
    /// Conditions on `obs` using a given standardization rather than the data's.
    GpModel(std::shared_ptr<const EigenBasis> basis, const Observations& obs, const Hyperparams& hp,
            const Standardization& st, double jitter);

    const EigenBasis& basis() const { return *m_basis; }
    std::shared_ptr<const EigenBasis> basis_ptr() const { return m_basis; }
    const Observations& observations() const { return m_obs; }
    const Hyperparams& hyperparams() const { return m_hp; }
    const Standardization& standardization() const { return m_st; }
    double jitter() const { return m_jitter; }
    double log_likelihood() const { return m_log_likelihood; }

    /// Posterior weight mean (standardized units).
    const Eigen::VectorXd& weight_mean() const { return m_weight_mean; }

    PosteriorField posterior_vertices(const std::vector<int>& vertices) const;
    PosteriorField posterior_centroids(const std::vector<int>& faces) const;
    PosteriorField posterior_all_vertices() const;
    PosteriorField posterior_all_centroids() const;

    GradientPosterior posterior_gradient(const std::vector<int>& faces) const;
    GradientPosterior posterior_gradient_all() const;

    FitDiagnostics diagnostics;

private:
    std::shared_ptr<const EigenBasis> m_basis;
    Observations m_obs;
    Hyperparams m_hp;
    Standardization m_st;
    double m_jitter = 1e-8;
    double m_log_likelihood = 0.0;
    Eigen::VectorXd m_sqrt_prior;
    Eigen::LLT<Eigen::MatrixXd> m_core;
    Eigen::VectorXd m_weight_mean;

    void condition();
    PosteriorField posterior_rows(const Eigen::MatrixXd& rows) const;
};

/// Maximizes the log marginal likelihood over (log l, log tau2, log eta)
/// with multi-start Nelder–Mead. Throws Error(Convergence) if no start
/// converges.
GpModel fit_hyperparameters(std::shared_ptr<const EigenBasis> basis, const Observations& obs,
                            const FitConfig& config = {});

} // namespace gpmi
