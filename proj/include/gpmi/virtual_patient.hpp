#pragma once

#include <gpmi/basis.hpp>
#include <gpmi/cv.hpp>
#include <gpmi/gp.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace gpmi {

struct SpeedParams
{
    /// Correlation length of the underlying Matérn 3/2 field (mm).
    double lengthscale = 20.0;
    double min_speed = 0.4;
    double max_speed = 1.2;
    std::uint64_t seed = 0;
};

/// Smooth random speed field (mm/ms) on the vertices of the basis mesh: a
/// prior sample with unit marginal variance, standardized and squashed by a
/// logistic into (min_speed, max_speed).
std::vector<double> sample_speed_field(const EigenBasis& basis, const SpeedParams& params);

struct TruthOptions
{
    /// Neighbourhood size for wave-method CV.
    int wave_k = 20;
    /// Faces where wave CV is computed; empty means every face.
    std::vector<int> wave_sites;
    bool wave_all_faces = true;
    /// Radius (mm) around each source initialized from surface distance.
    double exact_radius = 0.0;
};

struct TruthField
{
    std::vector<double> speed;
    std::vector<int> sources;
    /// ms per vertex
    std::vector<double> lat;
    /// One per face.
    std::vector<CvVector> element;
    std::vector<int> wave_sites;
    /// One per wave site.
    std::vector<CvVector> wave;
};

TruthField simulate_truth(const TriMesh& mesh, const std::vector<double>& speed, const std::vector<int>& sources,
                          const TruthOptions& options = {});

/// `count` well-spaced faces chosen by maximin over the dual graph (every
/// face when count covers the mesh).
std::vector<int> select_wave_sites(const TriMesh& mesh, int count, int designs, std::uint64_t seed);

enum class SamplingMode { Random, Maximin };

SamplingMode parse_sampling_mode(const std::string& text);

/// n distinct vertices with LAT corrupted by N(0, noise_sd^2); sigma is set
/// to noise_sd. Maximin mode spreads the vertices with `designs` random
/// candidate sets.
Observations sample_observations(const TriMesh& mesh, const std::vector<double>& lat, int n, double noise_sd,
                                 SamplingMode mode, std::uint64_t seed, int designs = 10000);

} // namespace gpmi
