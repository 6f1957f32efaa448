#include <gpmi/cv.hpp>
#include <gpmi/error.hpp>
#include <gpmi/parallel.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gpmi {

CvVector cv_from_gradient(const Vec3& gradient)
{
    CvVector out;
    out.gradient = gradient;
    const double g2 = gradient.squaredNorm();
    if (std::sqrt(g2) >= kCvClip) {
        out.cv = gradient / g2;
        out.defined = true;
    }
    return out;
}

CvVector element_cv(const Vec3& xi, const Vec3& xj, const Vec3& xk, double ti, double tj, double tk)
{
    const Vec3 cross = (xj - xi).cross(xk - xi);
    const double twice_area = cross.norm();
    require(twice_area > 2.0 * kMinFaceArea, ErrorCode::Mesh, "degenerate face in element CV");
    const Vec3 n = cross / twice_area;
    const Vec3 s = ti * (xj - xk) + tj * (xk - xi) + tk * (xi - xj);
    return cv_from_gradient(-n.cross(s) / twice_area);
}

std::vector<CvVector> element_cv_all(const TriMesh& mesh, const std::vector<double>& lat)
{
    require(lat.size() == mesh.num_vertices(), ErrorCode::InvalidArgument, "LAT must have one value per vertex");
    std::vector<CvVector> out(mesh.num_faces());
    for (std::size_t f = 0; f < out.size(); ++f) {
        const Face& face = mesh.faces[f];
        out[f] = element_cv(mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]], lat[face[0]],
                            lat[face[1]], lat[face[2]]);
    }
    return out;
}

Eigen::MatrixX2d classical_scaling(const Eigen::MatrixXd& distances)
{
    const Eigen::Index n = distances.rows();
    const Eigen::MatrixXd sq = distances.array().square().matrix();
    const Eigen::VectorXd row_mean = sq.rowwise().mean();
    const Eigen::VectorXd col_mean = sq.colwise().mean().transpose();
    const double all_mean = sq.mean();
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) b(i, j) = -0.5 * (sq(i, j) - row_mean[i] - col_mean[j] + all_mean);
    }
    b = 0.5 * (b + b.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
    const double l1 = eig.eigenvalues()[n - 1];
    const double l2 = eig.eigenvalues()[n - 2];
    if (!(l1 > 0) || !(l2 > 1e-10 * l1)) {
        fail(ErrorCode::Numeric, "distance embedding is rank deficient (points are collinear)");
    }
    Eigen::MatrixX2d x(n, 2);
    x.col(0) = eig.eigenvectors().col(n - 1) * std::sqrt(l1);
    x.col(1) = eig.eigenvectors().col(n - 2) * std::sqrt(std::max(l2, 0.0));
    return x;
}

WaveCvEstimator::WaveCvEstimator(const TriMesh& mesh, int k)
    : m_mesh(mesh)
    , m_k(k)
    , m_graph(WeightedGraph::from_mesh(mesh))
    , m_stencils(mesh)
{
    require(k >= 4, ErrorCode::InvalidArgument, "wave CV needs at least 4 neighbours");
    require(static_cast<std::size_t>(k) <= mesh.num_vertices(), ErrorCode::InvalidArgument,
            "wave CV neighbourhood larger than the mesh");
}

WaveCvEstimator::Patch WaveCvEstimator::patch(int face, Dijkstra& dijkstra, FastMarcher& marcher) const
{
    Patch p;
    p.vertices = k_nearest_to_face(m_mesh, dijkstra, face, m_k);
    const auto k = static_cast<Eigen::Index>(p.vertices.size());
    p.distances = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::Index remaining = k;
        marcher.run({{p.vertices[i], 0.0}}, MarchingMode::Distance, nullptr, [&](int v) {
            if (std::find(p.vertices.begin(), p.vertices.end(), v) != p.vertices.end()) --remaining;
            return remaining == 0;
        });
        for (Eigen::Index j = 0; j < k; ++j) p.distances(i, j) = marcher.value(p.vertices[j]);
    }
    p.distances = 0.5 * (p.distances + p.distances.transpose()).eval();
    return p;
}

CvVector wave_cv_from_patch(const TriMesh& mesh, const WaveCvEstimator::Patch& patch, const std::vector<double>& lat)
{
    const auto k = static_cast<Eigen::Index>(patch.vertices.size());
    const Eigen::MatrixX2d x = classical_scaling(patch.distances);

    Eigen::MatrixXd design(k, 3);
    Eigen::VectorXd t(k);
    Eigen::MatrixXd pos(k, 3);
    for (Eigen::Index i = 0; i < k; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = x(i, 0);
        design(i, 2) = x(i, 1);
        t[i] = lat[patch.vertices[i]];
        pos.row(i) = mesh.vertices[patch.vertices[i]].transpose();
    }
    const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(t);
    const Eigen::Vector2d g(coef[1], coef[2]);

    // Rotate the 2D embedding onto the centred 3D positions (orthogonal
    // Procrustes) and carry the gradient along.
    const Eigen::RowVector3d centre = pos.colwise().mean();
    pos.rowwise() -= centre;
    Eigen::MatrixX2d xc = x;
    xc.rowwise() -= xc.colwise().mean();
    const Eigen::Matrix<double, 3, 2> cross = pos.transpose() * xc;
    Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix<double, 3, 2> rot = svd.matrixU().leftCols<2>() * svd.matrixV().transpose();
    return cv_from_gradient(rot * g);
}

std::vector<CvVector> WaveCvEstimator::at_faces(const std::vector<int>& faces, const std::vector<double>& lat) const
{
    require(lat.size() == m_mesh.num_vertices(), ErrorCode::InvalidArgument, "LAT must have one value per vertex");
    std::vector<CvVector> out(faces.size());
    parallel_for(faces.size(), [&](std::size_t begin, std::size_t end) {
        Dijkstra dijkstra(m_graph);
        FastMarcher marcher(m_stencils);
        for (std::size_t i = begin; i < end; ++i) {
            try {
                out[i] = wave_cv_from_patch(m_mesh, patch(faces[i], dijkstra, marcher), lat);
            } catch (const Error& e) {
                fail(e.code(), "face " + std::to_string(faces[i]) + ": " + e.what());
            }
        }
    });
    return out;
}

double percentile_sorted(const std::vector<double>& sorted, double p)
{
    require(!sorted.empty(), ErrorCode::InvalidArgument, "percentile of empty data");
    const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 finalizer applied to a combination of both inputs.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

CvSummary sample_cv(const GradientPosterior& grad, int samples, std::uint64_t seed)
{
    require(samples >= 2, ErrorCode::InvalidArgument, "CV sampling needs at least 2 samples");
    const std::size_t n = grad.faces.size();
    CvSummary out;
    out.faces = grad.faces;
    out.samples = samples;
    out.seed = seed;
    out.grad_mean.resize(n);
    out.grad_sd.resize(n);
    out.grad_pct.resize(n);
    out.cv_pct.resize(n);
    out.cv_iqr.resize(n);
    out.cv_mean_direction.resize(n);
    out.undefined.resize(n);
    std::vector<char> undefined(n, 0);

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> mags(static_cast<std::size_t>(samples));
        for (std::size_t i = begin; i < end; ++i) {
            const Eigen::Matrix3d cov = 0.5 * (grad.cov[i] + grad.cov[i].transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
            const Eigen::Vector3d ev = eig.eigenvalues();
            const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
            if (ev.minCoeff() < -1e-9 * std::max(scale, 1.0)) {
                fail(ErrorCode::Numeric, "gradient covariance at face " + std::to_string(grad.faces[i]) +
                                             " is not positive semi-definite");
            }
            const Eigen::Matrix3d root = eig.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();

            std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(grad.faces[i])));
            std::normal_distribution<double> normal(0.0, 1.0);
            double sum = 0.0;
            for (auto& m : mags) {
                const Eigen::Vector3d z(normal(rng), normal(rng), normal(rng));
                m = (grad.mean[i] + root * z).norm();
                sum += m;
            }
            const double mean_mag = sum / samples;
            double ss = 0.0;
            for (double m : mags) ss += (m - mean_mag) * (m - mean_mag);
            out.grad_sd[i] = std::sqrt(ss / (samples - 1));
            std::sort(mags.begin(), mags.end());
            for (int r = 0; r < 5; ++r) out.grad_pct[i][r] = percentile_sorted(mags, kPercentileRanks[r]);
            for (int r = 0; r < 5; ++r) out.cv_pct[i][r] = 1.0 / out.grad_pct[i][4 - r];
            out.cv_iqr[i] = out.cv_pct[i][3] - out.cv_pct[i][1];

            const CvVector mean_cv = cv_from_gradient(grad.mean[i]);
            out.grad_mean[i] = grad.mean[i].norm();
            out.cv_mean_direction[i] = mean_cv.cv;
            undefined[i] = !mean_cv.defined;
        }
    });
    for (std::size_t i = 0; i < n; ++i) out.undefined[i] = undefined[i] != 0;
    return out;
}

namespace {

/// Smallest distance between differently labelled sources, found by a
/// labelled multi-source Dijkstra. Returns early with a value <= `abort_at`
/// once the answer is known not to exceed it.
class Separation
{
public:
    explicit Separation(const WeightedGraph& graph)
        : m_graph(graph)
        , m_dist(graph.num_nodes(), kInfinity)
        , m_label(graph.num_nodes(), -1)
        , m_stamp(graph.num_nodes(), 0)
        , m_done(graph.num_nodes(), 0)
    {}

    double run(const std::vector<int>& points, double abort_at)
    {
        ++m_epoch;
        m_heap.clear();
        auto cmp = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
            return a.first > b.first || (a.first == b.first && a.second > b.second);
        };
        for (std::size_t i = 0; i < points.size(); ++i) {
            const int p = points[i];
            if (m_stamp[p] == m_epoch) return 0.0;
            m_stamp[p] = m_epoch;
            m_dist[p] = 0.0;
            m_label[p] = static_cast<int>(i);
            m_heap.emplace_back(0.0, p);
        }
        std::make_heap(m_heap.begin(), m_heap.end(), cmp);
        double best = kInfinity;
        while (!m_heap.empty()) {
            std::pop_heap(m_heap.begin(), m_heap.end(), cmp);
            const auto [d, u] = m_heap.back();
            m_heap.pop_back();
            if (m_done[u] == m_epoch || d > m_dist[u]) continue;
            if (d >= best) break;
            m_done[u] = m_epoch;
            for (const auto* a = m_graph.begin(u); a != m_graph.end(u); ++a) {
                const int v = a->target;
                if (m_done[v] == m_epoch) {
                    if (m_label[v] != m_label[u]) best = std::min(best, d + a->weight + m_dist[v]);
                    continue;
                }
                const double nd = d + a->weight;
                if (m_stamp[v] != m_epoch || nd < m_dist[v]) {
                    m_stamp[v] = m_epoch;
                    m_dist[v] = nd;
                    m_label[v] = m_label[u];
                    m_heap.emplace_back(nd, v);
                    std::push_heap(m_heap.begin(), m_heap.end(), cmp);
                }
            }
            if (best <= abort_at) return best;
        }
        return best;
    }

private:
    const WeightedGraph& m_graph;
    std::vector<double> m_dist;
    std::vector<int> m_label;
    std::vector<unsigned> m_stamp;
    std::vector<unsigned> m_done;
    unsigned m_epoch = 0;
    std::vector<std::pair<double, int>> m_heap;
};

} // namespace

double min_pairwise_distance(const WeightedGraph& graph, const std::vector<int>& points)
{
    Separation sep(graph);
    return sep.run(points, -1.0);
}

std::vector<int> maximin_select(const WeightedGraph& graph, const std::vector<int>& candidates, int count,
                                int designs, std::uint64_t seed)
{
    require(count >= 1 && static_cast<std::size_t>(count) <= candidates.size(), ErrorCode::InvalidArgument,
            "design size must be between 1 and the candidate count");
    require(designs >= 1, ErrorCode::InvalidArgument, "need at least one design");
    for (int c : candidates) {
        require(c >= 0 && static_cast<std::size_t>(c) < graph.num_nodes(), ErrorCode::InvalidArgument,
                "candidate " + std::to_string(c) + " is outside the graph");
    }
    if (static_cast<std::size_t>(count) == candidates.size()) return candidates;

    std::mt19937_64 rng(seed);
    Separation sep(graph);
    std::vector<int> pool = candidates;
    std::vector<int> best;
    double best_value = -1.0;
    for (int d = 0; d < designs; ++d) {
        // Partial Fisher–Yates over a fresh copy so every design is drawn
        // from the same candidate order.
        pool = candidates;
        for (int i = 0; i < count; ++i) {
            std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
        }
        std::vector<int> design(pool.begin(), pool.begin() + count);
        const double value = count == 1 ? kInfinity : sep.run(design, best_value);
        if (value > best_value) {
            best_value = value;
            best = std::move(design);
        }
    }
    return best;
}

} // namespace gpmi
