#pragma once

#include "routewise/router.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace routewise {

/// Lowercases ASCII letters and collapses every run of Unicode whitespace to
/// a single space, trimming both ends.
std::string normalize_text(std::string_view text);

/// Lowercased tokens split on Unicode whitespace with leading and trailing
/// ASCII punctuation stripped. Tokens that end up empty are dropped.
std::vector<std::string> rouge_tokens(std::string_view text);

/// 1 if any non-empty normalized answer is a substring of the normalized
/// generation, else 0.
int accuracy_contains(std::string_view generation, std::span<const std::string> answers);

/// Bigram-overlap F1 with clipped counts. 0 when either side has fewer than
/// two tokens.
double rouge2_f1(std::string_view candidate, std::string_view reference);

/// Ranks with ties sharing the average of the positions they span (1-based).
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average-rank vectors. Throws undefined_value
/// when either input is constant.
double spearman_rho(std::span<const double> a, std::span<const double> b);

/// Standard competition rank (1-based) of `index` within `values`, higher is
/// better: one plus the number of strictly larger values.
std::size_t competition_rank(std::span<const double> values, std::size_t index);

/// Counts, for ranks 1..m, how often the chosen generator had that rank.
std::vector<std::size_t> rank_histogram(std::span<const std::vector<double>> per_sample_quality,
                                        std::span<const RoutingDecision> decisions);

/// Metric values on a 0-100 scale keyed by name, plus optional Spearman and
/// rank histogram.
struct EvalReport {
    std::size_t samples = 0;
    std::map<std::string, double> metrics;
    std::optional<double> spearman;
    std::vector<std::size_t> rank_histogram;
};

}  // namespace routewise
