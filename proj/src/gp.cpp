#include <gpmi/error.hpp>
#include <gpmi/gp.hpp>
#include <gpmi/optimizer.hpp>
#include <gpmi/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace gpmi {

double smoothness_value(Smoothness nu)
{
    switch (nu) {
    case Smoothness::Half: return 0.5;
    case Smoothness::ThreeHalves: return 1.5;
    case Smoothness::FiveHalves: return 2.5;
    }
    return 1.5;
}

Smoothness parse_smoothness(const std::string& text)
{
    if (text == "1/2" || text == "0.5") return Smoothness::Half;
    if (text == "3/2" || text == "1.5") return Smoothness::ThreeHalves;
    if (text == "5/2" || text == "2.5") return Smoothness::FiveHalves;
    fail(ErrorCode::InvalidArgument, "smoothness must be one of 1/2, 3/2, 5/2 (got '" + text + "')");
}

std::string to_string(Smoothness nu)
{
    switch (nu) {
    case Smoothness::Half: return "1/2";
    case Smoothness::ThreeHalves: return "3/2";
    case Smoothness::FiveHalves: return "5/2";
    }
    return "3/2";
}

double matern_spectral_density(double omega, Smoothness nu, double lengthscale, int dim)
{
    const double v = smoothness_value(nu);
    const double d = dim;
    const double log_c = d * std::log(2.0) + 0.5 * d * std::log(M_PI) + std::lgamma(v + 0.5 * d) - std::lgamma(v) +
                         v * std::log(2.0 * v) - 2.0 * v * std::log(lengthscale);
    const double base = 2.0 * v / (lengthscale * lengthscale) + omega * omega;
    return std::exp(log_c - (v + 0.5 * d) * std::log(base));
}

double matern_kernel(double r, Smoothness nu, double lengthscale)
{
    const double x = std::abs(r) / lengthscale;
    switch (nu) {
    case Smoothness::Half: return std::exp(-x);
    case Smoothness::ThreeHalves: {
        const double s = std::sqrt(3.0) * x;
        return (1.0 + s) * std::exp(-s);
    }
    case Smoothness::FiveHalves: {
        const double s = std::sqrt(5.0) * x;
        return (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    }
    return 0.0;
}

Eigen::VectorXd spectral_weights(const Eigen::VectorXd& lambdas, Smoothness nu, double lengthscale)
{
    Eigen::VectorXd s(lambdas.size());
    for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
        s[k] = matern_spectral_density(std::sqrt(std::max(lambdas[k], 0.0)), nu, lengthscale);
    }
    return s;
}

Eigen::VectorXd explained_variance(const Eigen::VectorXd& lambdas, const Hyperparams& hp)
{
    const Eigen::VectorXd s = spectral_weights(lambdas, hp.nu, hp.lengthscale);
    Eigen::VectorXd ev(s.size());
    double total = s.sum();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        acc += s[k];
        ev[k] = 100.0 * acc / total;
    }
    if (ev.size() > 0) ev[ev.size() - 1] = 100.0;
    return ev;
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& phi_a, const Eigen::MatrixXd& phi_b,
                              const Eigen::VectorXd& lambdas, const Hyperparams& hp)
{
    const Eigen::VectorXd w = hp.tau2 * spectral_weights(lambdas, hp.nu, hp.lengthscale);
    return phi_a * w.asDiagonal() * phi_b.transpose();
}

Observations merge_duplicates(const Observations& obs)
{
    require(obs.value.size() == obs.vertex.size() && obs.sigma.size() == obs.vertex.size(),
            ErrorCode::InvalidArgument, "observation arrays differ in length");
    std::map<int, std::vector<std::size_t>> by_vertex;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        require(obs.sigma[i] >= 0 && std::isfinite(obs.sigma[i]), ErrorCode::InvalidArgument,
                "observation " + std::to_string(i) + ": noise SD must be finite and >= 0");
        require(std::isfinite(obs.value[i]), ErrorCode::InvalidArgument,
                "observation " + std::to_string(i) + ": value must be finite");
        by_vertex[obs.vertex[i]].push_back(i);
    }
    Observations out;
    for (const auto& [v, idx] : by_vertex) {
        double y = 0.0, sigma = 0.0;
        if (idx.size() == 1) {
            y = obs.value[idx[0]];
            sigma = obs.sigma[idx[0]];
        } else {
            std::vector<std::size_t> exact;
            for (auto i : idx) {
                if (obs.sigma[i] == 0.0) exact.push_back(i);
            }
            if (!exact.empty()) {
                for (auto i : exact) y += obs.value[i];
                y /= static_cast<double>(exact.size());
            } else {
                double wsum = 0.0;
                for (auto i : idx) {
                    const double w = 1.0 / (obs.sigma[i] * obs.sigma[i]);
                    wsum += w;
                    y += w * obs.value[i];
                }
                y /= wsum;
                sigma = 1.0 / std::sqrt(wsum);
            }
        }
        out.vertex.push_back(v);
        out.value.push_back(y);
        out.sigma.push_back(sigma);
    }
    return out;
}

Standardization standardization_of(const std::vector<double>& values)
{
    Standardization st;
    if (values.empty()) return st;
    st.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.sd = std::sqrt(ss / static_cast<double>(values.size()));
    if (!(st.sd > 0)) st.sd = 1.0;
    return st;
}

LikelihoodEvaluator::LikelihoodEvaluator(const EigenBasis& basis, const Observations& obs, const Standardization& st,
                                         double jitter)
    : m_lambdas(&basis.lambdas)
    , m_jitter(jitter)
{
    std::map<double, std::vector<std::size_t>> by_noise;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        require(obs.vertex[i] >= 0 && obs.vertex[i] < basis.phi_v.rows(), ErrorCode::InvalidArgument,
                "observation vertex " + std::to_string(obs.vertex[i]) + " is outside the mesh");
        by_noise[obs.sigma[i] / st.sd].push_back(i);
    }
    const Eigen::Index m = basis.size();
    for (const auto& [noise, idx] : by_noise) {
        Eigen::MatrixXd phi(static_cast<Eigen::Index>(idx.size()), m);
        Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t r = 0; r < idx.size(); ++r) {
            phi.row(static_cast<Eigen::Index>(r)) = basis.phi_v.row(obs.vertex[idx[r]]);
            y[static_cast<Eigen::Index>(r)] = (obs.value[idx[r]] - st.mean) / st.sd;
        }
        Group g;
        g.noise = noise * noise;
        g.count = static_cast<double>(idx.size());
        g.yy = y.squaredNorm();
        g.gram = phi.transpose() * phi;
        g.proj = phi.transpose() * y;
        m_groups.push_back(std::move(g));
    }
}

double LikelihoodEvaluator::operator()(const Hyperparams& hp) const
{
    const Eigen::VectorXd d = (hp.tau2 * spectral_weights(*m_lambdas, hp.nu, hp.lengthscale)).cwiseSqrt();
    const Eigen::Index m = d.size();
    Eigen::MatrixXd core = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    double yy = 0.0, log_det_noise = 0.0, n = 0.0;
    for (const auto& g : m_groups) {
        const double var = g.noise + hp.eta + m_jitter;
        core.noalias() += g.gram / var;
        b.noalias() += g.proj / var;
        yy += g.yy / var;
        log_det_noise += g.count * std::log(var);
        n += g.count;
    }
    core = d.asDiagonal() * core * d.asDiagonal();
    core.diagonal().array() += 1.0;
    b = d.cwiseProduct(b);
    Eigen::LLT<Eigen::MatrixXd> llt(core);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd z = llt.matrixL().solve(b);
    const double quad = yy - z.squaredNorm();
    const double log_det_core = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return -0.5 * (quad + log_det_noise + log_det_core + n * std::log(2.0 * M_PI));
}

GpModel::GpModel(std::shared_ptr<const EigenBasis> basis, const Observations& obs, const Hyperparams& hp, double jitter)
    : m_basis(std::move(basis))
    , m_obs(merge_duplicates(obs))
    , m_hp(hp)
    , m_jitter(jitter)
{
    m_st = standardization_of(m_obs.value);
    condition();
}

GpModel::GpModel(std::shared_ptr<const EigenBasis> basis, const Hyperparams& hp, const Standardization& st)
    : m_basis(std::move(basis))
    , m_hp(hp)
    , m_st(st)
{
    condition();
}

GpModel::GpModel(std::shared_ptr<const EigenBasis> basis, const Observations& obs, const Hyperparams& hp,
                 const Standardization& st, double jitter)
    : m_basis(std::move(basis))
    , m_obs(merge_duplicates(obs))
    , m_hp(hp)
    , m_st(st)
    , m_jitter(jitter)
{
    condition();
}

void GpModel::condition()
{
    require(m_basis != nullptr, ErrorCode::InvalidArgument, "model needs a basis");
    require(m_hp.lengthscale > 0 && m_hp.tau2 > 0 && m_hp.eta >= 0, ErrorCode::InvalidArgument,
            "hyperparameters need lengthscale > 0, tau2 > 0, eta >= 0");
    require(m_st.sd > 0, ErrorCode::InvalidArgument, "standardization SD must be positive");
    const EigenBasis& basis = *m_basis;
    const Eigen::Index m = basis.size();
    m_sqrt_prior = (m_hp.tau2 * spectral_weights(basis.lambdas, m_hp.nu, m_hp.lengthscale)).cwiseSqrt();

    Eigen::MatrixXd core = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    if (m_obs.size() > 0) {
        const auto n = static_cast<Eigen::Index>(m_obs.size());
        Eigen::MatrixXd phi(n, m);
        Eigen::VectorXd w(n), y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int v = m_obs.vertex[i];
            require(v >= 0 && v < basis.phi_v.rows(), ErrorCode::InvalidArgument,
                    "observation vertex " + std::to_string(v) + " is outside the mesh");
            phi.row(i) = basis.phi_v.row(v);
            const double s = m_obs.sigma[i] / m_st.sd;
            w[i] = 1.0 / (s * s + m_hp.eta + m_jitter);
            y[i] = (m_obs.value[i] - m_st.mean) / m_st.sd;
        }
        core.noalias() = phi.transpose() * w.asDiagonal() * phi;
        b.noalias() = phi.transpose() * w.cwiseProduct(y);
        LikelihoodEvaluator eval(basis, m_obs, m_st, m_jitter);
        m_log_likelihood = eval(m_hp);
    }
    core = m_sqrt_prior.asDiagonal() * core * m_sqrt_prior.asDiagonal();
    core.diagonal().array() += 1.0;
    m_core.compute(core);
    if (m_core.info() != Eigen::Success) {
        fail(ErrorCode::Numeric, "posterior core matrix is not positive definite; increase the jitter or nugget");
    }
    const Eigen::VectorXd scaled_b = m_sqrt_prior.cwiseProduct(b);
    m_weight_mean = m_sqrt_prior.cwiseProduct(m_core.solve(scaled_b));
    if (!m_weight_mean.allFinite() || !std::isfinite(m_log_likelihood)) {
        fail(ErrorCode::Numeric, "non-finite posterior; the data covariance is numerically singular, add jitter");
    }
}

PosteriorField GpModel::posterior_rows(const Eigen::MatrixXd& rows) const
{
    const Eigen::Index n = rows.rows();
    PosteriorField out;
    out.mean.resize(n);
    out.variance.resize(n);
    const double sd2 = m_st.sd * m_st.sd;
    // Fixed-size column blocks keep results independent of the thread count.
    const Eigen::Index block = 256;
    const auto blocks = static_cast<std::size_t>((n + block - 1) / block);
    parallel_for(blocks, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto b = static_cast<Eigen::Index>(k) * block;
            const Eigen::Index len = std::min(block, n - b);
            Eigen::MatrixXd a = m_sqrt_prior.asDiagonal() * rows.middleRows(b, len).transpose();
            m_core.matrixL().solveInPlace(a);
            out.mean.segment(b, len) = (rows.middleRows(b, len) * m_weight_mean).array() * m_st.sd + m_st.mean;
            out.variance.segment(b, len) = a.colwise().squaredNorm().transpose() * sd2;
        }
    });
    return out;
}

namespace {

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows, const char* what)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= m.rows()) {
            fail(ErrorCode::InvalidArgument, std::string("unknown ") + what + " " + std::to_string(rows[i]));
        }
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    }
    return out;
}

} // namespace

PosteriorField GpModel::posterior_vertices(const std::vector<int>& vertices) const
{
    return posterior_rows(select_rows(m_basis->phi_v, vertices, "vertex"));
}

PosteriorField GpModel::posterior_centroids(const std::vector<int>& faces) const
{
    return posterior_rows(select_rows(m_basis->phi_c, faces, "face"));
}

PosteriorField GpModel::posterior_all_vertices() const
{
    return posterior_rows(m_basis->phi_v);
}

PosteriorField GpModel::posterior_all_centroids() const
{
    return posterior_rows(m_basis->phi_c);
}

GradientPosterior GpModel::posterior_gradient(const std::vector<int>& faces) const
{
    if (m_hp.nu == Smoothness::Half) {
        fail(ErrorCode::InvalidArgument,
             "gradient posterior is undefined for smoothness 1/2 (sample paths are not differentiable)");
    }
    const EigenBasis& basis = *m_basis;
    for (int f : faces) {
        require(f >= 0 && f < basis.phi_c.rows(), ErrorCode::InvalidArgument, "unknown face " + std::to_string(f));
    }
    GradientPosterior out;
    out.faces = faces;
    out.mean.resize(faces.size());
    out.cov.resize(faces.size());
    const Eigen::Index m = basis.size();
    const double sd = m_st.sd;
    const std::size_t chunk = 256;
    parallel_for((faces.size() + chunk - 1) / chunk, [&](std::size_t begin, std::size_t end) {
        for (std::size_t blk = begin; blk < end; ++blk) {
            const std::size_t lo = blk * chunk;
            const std::size_t hi = std::min(faces.size(), lo + chunk);
            const auto cnt = static_cast<Eigen::Index>(hi - lo);
            Eigen::MatrixXd g(m, 3 * cnt);
            for (Eigen::Index i = 0; i < cnt; ++i) {
                const int f = faces[lo + static_cast<std::size_t>(i)];
                for (int c = 0; c < 3; ++c) g.col(3 * i + c) = basis.grad_c[c].row(f).transpose();
            }
            Eigen::MatrixXd a = m_sqrt_prior.asDiagonal() * g;
            m_core.matrixL().solveInPlace(a);
            for (Eigen::Index i = 0; i < cnt; ++i) {
                const std::size_t k = lo + static_cast<std::size_t>(i);
                const auto cols = a.middleCols(3 * i, 3);
                out.cov[k] = (cols.transpose() * cols) * (sd * sd);
                out.mean[k] = (g.middleCols(3 * i, 3).transpose() * m_weight_mean) * sd;
            }
        }
    });
    return out;
}

GradientPosterior GpModel::posterior_gradient_all() const
{
    std::vector<int> faces(m_basis->phi_c.rows());
    std::iota(faces.begin(), faces.end(), 0);
    return posterior_gradient(faces);
}

GpModel fit_hyperparameters(std::shared_ptr<const EigenBasis> basis, const Observations& raw, const FitConfig& config)
{
    require(basis != nullptr, ErrorCode::InvalidArgument, "fit needs a basis");
    const Observations obs = merge_duplicates(raw);
    require(obs.size() >= 2, ErrorCode::InvalidArgument, "fitting needs at least 2 distinct observation vertices");
    require(config.starts >= 1, ErrorCode::InvalidArgument, "fitting needs at least one start");
    const Standardization st = standardization_of(obs.value);
    const LikelihoodEvaluator likelihood(*basis, obs, st, config.jitter);

    const double l_lo = config.lengthscale_min > 0 ? config.lengthscale_min : mean_edge_length(basis->mesh);
    const double l_hi = config.lengthscale_max > 0 ? config.lengthscale_max : bounding_diameter(basis->mesh);
    require(l_lo > 0 && l_hi > l_lo && config.tau2_min > 0 && config.tau2_max > config.tau2_min &&
                config.eta_min > 0 && config.eta_max > config.eta_min,
            ErrorCode::InvalidArgument, "invalid hyperparameter bounds");
    Eigen::Vector3d lower(std::log(l_lo), std::log(config.tau2_min), std::log(config.eta_min));
    Eigen::Vector3d upper(std::log(l_hi), std::log(config.tau2_max), std::log(config.eta_max));

    auto to_hp = [&](const Eigen::VectorXd& x) {
        Hyperparams hp;
        hp.nu = config.nu;
        hp.lengthscale = std::exp(x[0]);
        hp.tau2 = std::exp(x[1]);
        hp.eta = std::exp(x[2]);
        return hp;
    };
    auto objective = [&](const Eigen::VectorXd& x) { return -likelihood(to_hp(x)); };

    // Latin hypercube over the log-box.
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int k = config.starts;
    std::vector<Eigen::VectorXd> starts(k, Eigen::VectorXd(3));
    for (int dim = 0; dim < 3; ++dim) {
        std::vector<int> strata(k);
        std::iota(strata.begin(), strata.end(), 0);
        for (int i = k - 1; i > 0; --i) {
            std::uniform_int_distribution<int> pick(0, i);
            std::swap(strata[i], strata[pick(rng)]);
        }
        for (int i = 0; i < k; ++i) {
            const double u = (strata[i] + unit(rng)) / k;
            starts[i][dim] = lower[dim] + u * (upper[dim] - lower[dim]);
        }
    }

    NelderMeadOptions nm;
    nm.max_evaluations = config.max_evaluations;
    FitDiagnostics diag;
    diag.starts.resize(k);
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x;
    bool any_converged = false;
    for (int i = 0; i < k; ++i) {
        const NelderMeadResult r = nelder_mead(objective, starts[i], lower, upper, nm);
        FitStart& s = diag.starts[i];
        s.start = to_hp(starts[i]);
        s.start_log_likelihood = likelihood(s.start);
        s.result = to_hp(r.x);
        s.log_likelihood = -r.value;
        s.evaluations = r.evaluations;
        s.converged = r.converged && std::isfinite(r.value);
        any_converged = any_converged || s.converged;
        if (std::isfinite(r.value) && r.value < best) {
            best = r.value;
            best_x = r.x;
            diag.best_start = i;
        }
    }
    if (!any_converged || best_x.size() == 0) {
        std::ostringstream os;
        os << "hyperparameter search did not converge from any of " << k << " starts";
        if (best_x.size() > 0) {
            const Hyperparams hp = to_hp(best_x);
            os << "; best found l=" << hp.lengthscale << " tau2=" << hp.tau2 << " eta=" << hp.eta
               << " log-likelihood=" << -best;
        }
        fail(ErrorCode::Convergence, os.str());
    }
    GpModel model(std::move(basis), obs, to_hp(best_x), st, config.jitter);
    model.diagnostics = std::move(diag);
    return model;
}

} // namespace gpmi
