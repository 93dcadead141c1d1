#pragma once

#include "routewise/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace routewise {

enum class RegionRule {
    round_robin,  // sample s belongs to region s % R
    contiguous,   // sample s belongs to region floor(s * R / n)
};

const char* to_string(RegionRule rule) noexcept;
RegionRule parse_region_rule(const std::string& text);

/// Parameters of a synthetic ensemble drawn from the Gaussian quality model.
///
/// `region_theta` holds one quality vector per theta profile. With a single
/// region the first profile applies to every sample. With R regions, region r
/// uses profile r % region_theta.size(), so two profiles can be tiled over
/// many small regions.
struct SyntheticConfig {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t d = 0;
    std::vector<std::vector<double>> region_theta;
    std::size_t regions = 1;
    RegionRule rule = RegionRule::round_robin;
    // Per-coordinate standard deviation of the latent embedding around its
    // region centroid (multi-region only).
    double region_spread = 1.0;
    // Distance between region centroids. Exact when regions <= d, otherwise
    // the expected distance between randomly placed centroids.
    double centroid_distance = 10.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Samples plus the ground truth they were drawn from. Each record's
/// input_key is its latent embedding.
struct SyntheticDataset {
    SyntheticConfig config;
    EnsembleSpec spec;
    std::vector<EmbeddingRecord> records;
    std::vector<std::vector<double>> latent;       // n x d
    std::vector<std::vector<double>> theta_truth;  // n x m
    std::vector<std::size_t> region_labels;        // n, all zero for one region

    /// Index of the highest true theta per sample (ties to the lowest index).
    std::vector<std::size_t> best_generators() const;
};

/// Draws z*(x) (standard normal, or centroid plus spread with regions), then
/// each generator embedding as z*(x) plus N(0, 1 / (2 theta)) noise per
/// coordinate. Fully determined by the config, seed included.
SyntheticDataset sample_dataset(const SyntheticConfig& config);

/// Same as sample_dataset but requires at least two regions and at least two
/// distinct theta profiles.
SyntheticDataset sample_piecewise(const SyntheticConfig& config);

struct PairMomentReport {
    std::size_t i = 0;
    std::size_t j = 0;
    double empirical = 0.0;       // mean ||lambda_i - lambda_j||^2
    double analytic = 0.0;        // mean d/(2 theta_i) + d/(2 theta_j)
    double relative_error = 0.0;
    double cross_term_mean = 0.0;  // mean (lambda_i - z*) . (lambda_j - z*)
    double cross_term_stderr = 0.0;
};

/// Compares the observed pairwise moments against their closed form.
std::vector<PairMomentReport> verify_pair_moments(const SyntheticDataset& dataset);

struct NoiseVarianceReport {
    std::size_t generator = 0;
    double empirical = 0.0;  // pooled per-coordinate variance of lambda - z*
    double analytic = 0.0;   // mean 1 / (2 theta)
    double relative_error = 0.0;
    std::size_t draws = 0;
};

std::vector<NoiseVarianceReport> verify_noise_variance(const SyntheticDataset& dataset);

/// Fraction of samples whose nearest other sample (by input key) shares its
/// region.
double nearest_neighbor_region_recovery(const SyntheticDataset& dataset);

}  // namespace routewise
