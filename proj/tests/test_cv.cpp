#include "support.hpp"

#include <gpmi/cv.hpp>
#include <gpmi/error.hpp>
#include <gpmi/parallel.hpp>
#include <gpmi/shapes.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace gpmi;

namespace {

GradientPosterior single(const Vec3& mean, const Eigen::Matrix3d& cov, int face = 0)
{
    GradientPosterior g;
    g.faces = {face};
    g.mean = {mean};
    g.cov = {cov};
    return g;
}

GradientPosterior random_posterior(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    GradientPosterior g;
    for (std::size_t i = 0; i < n; ++i) {
        g.faces.push_back(static_cast<int>(i));
        g.mean.push_back(Vec3(testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1), 0.0));
        Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
        a.topLeftCorner<2, 2>() << testing::uniform(rng, -0.3, 0.3), testing::uniform(rng, -0.3, 0.3),
            testing::uniform(rng, -0.3, 0.3), testing::uniform(rng, -0.3, 0.3);
        g.cov.push_back(a * a.transpose());
    }
    return g;
}

bool same_summary(const CvSummary& a, const CvSummary& b)
{
    return a.faces == b.faces && a.grad_mean == b.grad_mean && a.grad_sd == b.grad_sd && a.grad_pct == b.grad_pct &&
           a.cv_pct == b.cv_pct && a.cv_iqr == b.cv_iqr && a.cv_mean_direction == b.cv_mean_direction &&
           a.undefined == b.undefined;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return percentile_sorted(v, 50);
}

} // namespace

TEST_CASE("isotropic zero-mean gradients have the Rayleigh median")
{
    const double sigma = 0.7;
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    cov(0, 0) = cov(1, 1) = sigma * sigma;
    const int n = 2000;
    const double expected = sigma * std::sqrt(2.0 * std::log(2.0));
    const double se = sigma * sigma / (expected * std::sqrt(static_cast<double>(n)));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const CvSummary s = sample_cv(single(Vec3::Zero(), cov), n, seed);
        CHECK(std::abs(s.grad_pct[0][2] - expected) <= 3.0 * se);
    }
}

TEST_CASE("zero covariance collapses every statistic to the mean")
{
    const Vec3 mean(0.3, -0.4, 0.0);
    const CvSummary s = sample_cv(single(mean, Eigen::Matrix3d::Zero()), 100, 1);
    CHECK(s.grad_mean[0] == doctest::Approx(0.5));
    CHECK(s.grad_sd[0] == 0.0);
    for (int r = 0; r < 5; ++r) {
        CHECK(s.grad_pct[0][r] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(s.cv_pct[0][r] == doctest::Approx(2.0).epsilon(1e-15));
    }
    CHECK(s.cv_iqr[0] == doctest::Approx(0.0));
    CHECK(s.cv_mean_direction[0].isApprox(mean / mean.squaredNorm()));
    CHECK_FALSE(s.undefined[0]);
}

TEST_CASE("identical seeds give identical summaries at any thread count")
{
    const GradientPosterior g = random_posterior(500, 2);
    const int saved = num_threads();
    set_num_threads(1);
    const CvSummary one = sample_cv(g, 300, 99);
    set_num_threads(8);
    const CvSummary eight = sample_cv(g, 300, 99);
    set_num_threads(saved);
    CHECK(same_summary(one, eight));
    CHECK(same_summary(one, sample_cv(g, 300, 99)));
    CHECK_FALSE(same_summary(one, sample_cv(g, 300, 100)));
}

TEST_CASE("CV percentiles are the inverted gradient percentiles")
{
    const GradientPosterior g = random_posterior(300, 3);
    const CvSummary s = sample_cv(g, 500, 4);
    for (std::size_t i = 0; i < s.faces.size(); ++i) {
        for (int r = 0; r < 5; ++r) {
            CHECK(s.cv_pct[i][r] == 1.0 / s.grad_pct[i][4 - r]);
            CHECK(std::abs(s.cv_pct[i][r] * s.grad_pct[i][4 - r] - 1.0) <= std::numeric_limits<double>::epsilon());
        }
        CHECK(s.cv_iqr[i] == s.cv_pct[i][3] - s.cv_pct[i][1]);
        for (int r = 1; r < 5; ++r) CHECK(s.grad_pct[i][r] >= s.grad_pct[i][r - 1]);
    }
}

TEST_CASE("scaling a zero-mean covariance by c^2 scales the magnitude SD by c")
{
    const Vec3 mean = Vec3::Zero();
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    cov.topLeftCorner<2, 2>() << 0.04, 0.01, 0.01, 0.02;
    const int n = 2000;
    for (double c : {0.5, 2.0, 3.0}) {
        const CvSummary base = sample_cv(single(mean, cov), n, 11);
        const CvSummary scaled = sample_cv(single(mean, c * c * cov), n, 12);
        const double se = std::sqrt(std::pow(c * base.grad_sd[0], 2) + std::pow(scaled.grad_sd[0], 2)) /
                          std::sqrt(2.0 * (n - 1));
        CHECK(std::abs(scaled.grad_sd[0] - c * base.grad_sd[0]) <= 3.0 * se);
    }
}

TEST_CASE("non-PSD covariance is rejected naming the face")
{
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    cov(0, 0) = -1.0;
    try {
        sample_cv(single(Vec3::Zero(), cov, 17), 10, 0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Numeric);
        CHECK(std::string(e.what()).find("17") != std::string::npos);
    }
    CHECK_GPMI_ERROR(sample_cv(single(Vec3::Zero(), Eigen::Matrix3d::Zero()), 1, 0), ErrorCode::InvalidArgument);
}

TEST_CASE("element CV of a planar wave and of a flat field")
{
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
    const CvVector v = element_cv(a, b, c, 0.0, 2.0, 0.0);
    CHECK(v.gradient.isApprox(Vec3(2, 0, 0)));
    CHECK(v.cv.isApprox(Vec3(0.5, 0, 0)));
    CHECK(v.defined);

    const CvVector flat = element_cv(a, b, c, 3.0, 3.0, 3.0);
    CHECK(flat.gradient.norm() == 0.0);
    CHECK_FALSE(flat.defined);
    CHECK(flat.cv == Vec3::Zero());

    CHECK_FALSE(cv_from_gradient(Vec3(0.5 * kCvClip, 0, 0)).defined);
    CHECK(cv_from_gradient(Vec3(2.0 * kCvClip, 0, 0)).defined);
}

TEST_CASE("element CV gradient equals the analytic plane gradient")
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        Vec3 p[3];
        for (auto& x : p) x = Vec3(testing::uniform(rng, -3, 3), testing::uniform(rng, -3, 3), testing::uniform(rng, -3, 3));
        const Vec3 n = (p[1] - p[0]).cross(p[2] - p[0]);
        if (n.norm() < 0.5) continue;
        const Vec3 nh = n.normalized();
        const Vec3 g(testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1));
        const double t0 = 5.0;
        const CvVector v = element_cv(p[0], p[1], p[2], t0 + g.dot(p[0]), t0 + g.dot(p[1]), t0 + g.dot(p[2]));
        const Vec3 in_plane = g - nh * nh.dot(g);
        CHECK((v.gradient - in_plane).norm() < 1e-9);
    }
}

TEST_CASE("wave CV recovers a plane wave on a flat grid")
{
    const TriMesh grid = shapes::grid(30, 30, 29.0, 29.0);
    std::vector<double> lat(grid.num_vertices());
    for (std::size_t v = 0; v < lat.size(); ++v) lat[v] = 2.0 * grid.vertices[v].x() + grid.vertices[v].y();
    const WaveCvEstimator est(grid);
    std::vector<int> faces;
    for (int f = 0; f < static_cast<int>(grid.num_faces()); f += 37) faces.push_back(f);
    const auto cv = est.at_faces(faces, lat);
    for (const auto& c : cv) {
        CHECK(std::abs(c.gradient.norm() - std::sqrt(5.0)) <= 0.01 * std::sqrt(5.0));
        CHECK(c.gradient.normalized().isApprox(Vec3(2, 1, 0).normalized(), 1e-6));
    }

    const std::vector<double> constant(grid.num_vertices(), 7.0);
    for (const auto& c : est.at_faces(faces, constant)) {
        CHECK(c.gradient.norm() < 1e-9);
        CHECK_FALSE(c.defined);
    }
}

TEST_CASE("wave and element CV agree on a curved cap")
{
    const double r = 25.0, speed = 0.6;
    const TriMesh cap = shapes::sphere_with_holes(r, 3, {{Vec3(0, 0, 1), 0.5}, {Vec3(0, 0, -1), 0.5}});
    std::vector<double> lat(cap.num_vertices());
    for (std::size_t v = 0; v < lat.size(); ++v) {
        lat[v] = r * std::acos(std::clamp(cap.vertices[v].normalized().z(), -1.0, 1.0)) / speed;
    }
    const auto element = element_cv_all(cap, lat);
    std::vector<int> faces(cap.num_faces());
    for (std::size_t f = 0; f < faces.size(); ++f) faces[f] = static_cast<int>(f);
    const auto wave = WaveCvEstimator(cap).at_faces(faces, lat);
    std::vector<double> rel;
    for (std::size_t f = 0; f < faces.size(); ++f) {
        rel.push_back(std::abs(wave[f].cv.norm() - element[f].cv.norm()) / element[f].cv.norm());
    }
    const double med = median(rel);
    MESSAGE("median relative |CV| discrepancy: " << med);
    CHECK(med < 0.10);
}

TEST_CASE("classical scaling reproduces planar configurations")
{
    std::mt19937_64 rng(7);
    Eigen::MatrixX2d pts(12, 2);
    for (int i = 0; i < 12; ++i) pts.row(i) << testing::uniform(rng, -5, 5), testing::uniform(rng, -5, 5);
    Eigen::MatrixXd d(12, 12);
    for (int i = 0; i < 12; ++i) {
        for (int j = 0; j < 12; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
    }
    const Eigen::MatrixX2d x = classical_scaling(d);
    for (int i = 0; i < 12; ++i) {
        for (int j = 0; j < 12; ++j) CHECK(std::abs((x.row(i) - x.row(j)).norm() - d(i, j)) < 1e-9);
    }

    WaveCvEstimator::Patch line;
    line.vertices = {0, 1, 2, 3};
    line.distances.resize(4, 4);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) line.distances(i, j) = std::abs(i - j);
    }
    const TriMesh g = shapes::grid(4, 2, 3.0, 1.0);
    CHECK_GPMI_ERROR(wave_cv_from_patch(g, line, std::vector<double>(g.num_vertices(), 1.0)), ErrorCode::Numeric);
}

TEST_CASE("percentiles interpolate between order statistics")
{
    CHECK(percentile_sorted({0.0, 10.0}, 50) == 5.0);
    CHECK(percentile_sorted({1.0, 2.0, 3.0, 4.0, 5.0}, 25) == 2.0);
    CHECK(percentile_sorted({1.0, 2.0, 3.0, 4.0, 5.0}, 0) == 1.0);
    CHECK(percentile_sorted({1.0, 2.0, 3.0, 4.0, 5.0}, 100) == 5.0);
    CHECK(percentile_sorted({4.0}, 91) == 4.0);
}

TEST_CASE("maximin selection: full set, endpoints and exhaustive optimum")
{
    const TriMesh strip = shapes::grid(16, 2, 15.0, 1.0);
    const WeightedGraph graph = WeightedGraph::from_mesh(strip);
    std::vector<int> line(16);
    for (int i = 0; i < 16; ++i) line[i] = i;

    const auto all = maximin_select(graph, line, 16, 5, 1);
    CHECK(std::vector<int>(all.begin(), all.end()).size() == 16);
    std::vector<int> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == line);

    auto ends = maximin_select(graph, line, 2, 2000, 3);
    std::sort(ends.begin(), ends.end());
    CHECK(ends == std::vector<int>{0, 15});

    double best = 0.0;
    for (int a = 0; a < 16; ++a) {
        for (int b = a + 1; b < 16; ++b) {
            for (int c = b + 1; c < 16; ++c) best = std::max(best, min_pairwise_distance(graph, {a, b, c}));
        }
    }
    const auto three = maximin_select(graph, line, 3, 5000, 4);
    CHECK(min_pairwise_distance(graph, three) == doctest::Approx(best));
    CHECK(maximin_select(graph, line, 3, 5000, 4) == three);

    std::mt19937_64 rng(8);
    double random_mean = 0.0;
    for (int i = 0; i < 200; ++i) {
        const int a = testing::uniform_int(rng, 0, 15);
        int b = testing::uniform_int(rng, 0, 14);
        if (b >= a) ++b;
        random_mean += std::abs(a - b);
    }
    CHECK(min_pairwise_distance(graph, ends) >= random_mean / 200.0);
}

TEST_CASE("seed mixing separates streams")
{
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
    CHECK(mix_seed(0, 0) != mix_seed(0, 1));
}
