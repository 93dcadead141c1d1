#pragma once

#include "routewise/knn.hpp"
#include "routewise/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace routewise {

struct RoutingDecision {
    std::string sample_id;
    std::size_t chosen = 0;
    std::vector<double> scores;
    std::string method;
};

/// A validation/test sample with known per-generator quality in metric units.
/// `key` is the sample's embedding for similarity lookups (Labeled-KNN).
struct LabeledExample {
    std::string sample_id;
    std::string reference_output;
    std::vector<double> per_generator_quality;
    std::optional<std::vector<double>> key;
};

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

RoutingDecision route_argmax(const ThetaEstimate& theta);
std::vector<RoutingDecision> route_all(std::span<const ThetaEstimate> estimates);

/// Uniform random choice per sample, reproducible for a given seed.
std::vector<RoutingDecision> baseline_random(std::size_t n_samples, std::size_t m, std::uint64_t seed);

/// Expected metric of random routing: the mean over generators of each
/// generator's mean quality. Rows are samples, columns generators.
double random_expected_performance(std::span<const std::vector<double>> quality);

/// Generator with the highest mean quality over `val`.
std::size_t baseline_best_on_val(std::span<const LabeledExample> val);

inline constexpr std::size_t kDefaultLabeledNeighbors = 20;

/// For each test key, the generator with the highest mean quality over its k
/// nearest validation examples under cosine distance.
std::vector<RoutingDecision> baseline_labeled_knn(std::span<const LabeledExample> val,
                                                  std::span<const std::vector<double>> test_keys,
                                                  std::span<const std::string> test_ids,
                                                  std::size_t k = kDefaultLabeledNeighbors);

}  // namespace routewise
