#pragma once

#include <gpmi/fast_marching.hpp>
#include <gpmi/gp.hpp>
#include <gpmi/graph.hpp>
#include <gpmi/mesh.hpp>

#include <array>
#include <cstdint>
#include <vector>

namespace gpmi {

/// Gradient magnitudes below this (ms/mm) leave the conduction velocity
/// undefined (it would exceed 50 mm/ms).
inline constexpr double kCvClip = 0.02;

struct CvVector
{
    /// LAT gradient (ms/mm).
    Vec3 gradient = Vec3::Zero();
    /// gradient / |gradient|^2 (mm/ms); zero when undefined.
    Vec3 cv = Vec3::Zero();
    bool defined = false;
};

CvVector cv_from_gradient(const Vec3& gradient);

/// Gradient of the linear interpolant of (ti, tj, tk) over triangle (xi, xj, xk).
CvVector element_cv(const Vec3& xi, const Vec3& xj, const Vec3& xk, double ti, double tj, double tk);

std::vector<CvVector> element_cv_all(const TriMesh& mesh, const std::vector<double>& lat);

/// Plane-wave fit to the LAT of the k vertices nearest each face centroid,
/// after embedding them in 2D by classical scaling of their surface
/// distances.
class WaveCvEstimator
{
public:
    explicit WaveCvEstimator(const TriMesh& mesh, int k = 20);

    std::vector<CvVector> at_faces(const std::vector<int>& faces, const std::vector<double>& lat) const;

    /// Neighbourhood of a face and its pairwise surface distances.
    struct Patch
    {
        std::vector<int> vertices;
        Eigen::MatrixXd distances;
    };
    Patch patch(int face, Dijkstra& dijkstra, FastMarcher& marcher) const;

private:
    const TriMesh& m_mesh;
    int m_k;
    WeightedGraph m_graph;
    MarchingStencils m_stencils;
};

/// Plane-wave fit given a patch. Throws Error(Numeric) when the patch
/// embedding is rank deficient.
CvVector wave_cv_from_patch(const TriMesh& mesh, const WaveCvEstimator::Patch& patch, const std::vector<double>& lat);

/// Top-two classical scaling coordinates of a distance matrix, one row per point.
Eigen::MatrixX2d classical_scaling(const Eigen::MatrixXd& distances);

inline constexpr std::array<int, 5> kPercentileRanks = {9, 25, 50, 75, 91};

struct CvSummary
{
    std::vector<int> faces;
    /// Magnitude of the posterior mean gradient.
    std::vector<double> grad_mean;
    /// Standard deviation of sampled gradient magnitudes.
    std::vector<double> grad_sd;
    std::vector<std::array<double, 5>> grad_pct;
    /// cv_pct[i][r] = 1 / grad_pct[i][4 - r]
    std::vector<std::array<double, 5>> cv_pct;
    std::vector<double> cv_iqr;
    std::vector<Vec3> cv_mean_direction;
    std::vector<bool> undefined;
    int samples = 0;
    std::uint64_t seed = 0;
};

/// Linear interpolation between order statistics of sorted data.
double percentile_sorted(const std::vector<double>& sorted, double p);

/// Monte-Carlo |grad LAT| and CV statistics per centroid. Each centroid draws
/// from its own random stream keyed by (seed, face id).
CvSummary sample_cv(const GradientPosterior& grad, int samples, std::uint64_t seed);

/// Among `designs` random subsets of `count` candidates, the first one with
/// the largest minimum pairwise graph distance.
std::vector<int> maximin_select(const WeightedGraph& graph, const std::vector<int>& candidates, int count,
                                int designs, std::uint64_t seed);

/// Smallest graph distance between two distinct members of `points`.
double min_pairwise_distance(const WeightedGraph& graph, const std::vector<int>& points);

/// Stateless 64-bit mixing used to derive independent random streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace gpmi
