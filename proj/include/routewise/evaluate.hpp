#pragma once

#include "routewise/io.hpp"
#include "routewise/metrics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace routewise {

/// Per-sample, per-generator quality in metric units ([0, 1] for both task
/// metrics). Uses each label's quality vector when present, otherwise scores
/// the generations against the references: containment for `contains`, best
/// Rouge-2 F1 over references for `rouge2`.
std::vector<std::vector<double>> quality_matrix(const std::vector<LabelEntry>& labels,
                                                const std::vector<GenerationEntry>* generations,
                                                TaskMetric metric);

/// Compares estimated scores with simulation truth: mean per-sample Spearman
/// rho, worst relative error of the scores (percent), and the rate at which
/// the argmax matches the true best generator (percent).
EvalReport evaluate_against_truth(const EstimatesFile& estimates, const TruthFile& truth);

struct ValidationSet {
    std::vector<LabeledExample> examples;
    std::size_t sample_size = 50;
    std::size_t draws = 10;
    std::uint64_t seed = 0;
    std::size_t knn_k = kDefaultLabeledNeighbors;
};

/// Scores a routing run against per-sample quality. Reports, on a 0-100
/// scale: the routed result, the expected random result, the best single
/// generator, and the per-sample oracle; with a validation set also
/// best-on-val (averaged over seeded draws) and labeled-KNN (when test keys
/// are supplied). Includes the rank histogram of the routed choices.
EvalReport evaluate_routing(std::span<const RoutingDecision> decisions,
                            std::span<const std::vector<double>> quality,
                            const ValidationSet* validation = nullptr,
                            std::span<const std::vector<double>> test_keys = {});

}  // namespace routewise
