#include "routewise/router.hpp"

#include "routewise/error.hpp"
#include "routewise/rng.hpp"

#include <algorithm>
#include <cmath>

namespace routewise {

namespace {

std::vector<double> mean_quality(std::span<const LabeledExample> examples,
                                 std::span<const std::size_t> rows) {
    const std::size_t m = examples[rows.front()].per_generator_quality.size();
    std::vector<double> sums(m, 0.0);
    for (std::size_t r : rows) {
        const auto& q = examples[r].per_generator_quality;
        if (q.size() != m)
            fail(ErrorCode::inconsistent_embeddings,
                 "quality vector length differs for '" + examples[r].sample_id + "'");
        for (std::size_t g = 0; g < m; ++g) {
            if (!std::isfinite(q[g]))
                fail(ErrorCode::invalid_argument, "non-finite quality for '" + examples[r].sample_id + "'");
            sums[g] += q[g];
        }
    }
    for (double& s : sums) s /= static_cast<double>(rows.size());
    return sums;
}

}  // namespace

std::size_t argmax_lowest(std::span<const double> values) {
    if (values.empty()) fail(ErrorCode::invalid_argument, "argmax of an empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

RoutingDecision route_argmax(const ThetaEstimate& theta) {
    for (double s : theta.scores)
        if (!std::isfinite(s))
            fail(ErrorCode::invalid_argument, "non-finite score for '" + theta.sample_id + "'");
    RoutingDecision out;
    out.sample_id = theta.sample_id;
    out.chosen = argmax_lowest(theta.scores);
    out.scores = theta.scores;
    out.method = to_string(theta.mode);
    return out;
}

std::vector<RoutingDecision> route_all(std::span<const ThetaEstimate> estimates) {
    std::vector<RoutingDecision> out;
    out.reserve(estimates.size());
    for (const auto& e : estimates) out.push_back(route_argmax(e));
    return out;
}

std::vector<RoutingDecision> baseline_random(std::size_t n_samples, std::size_t m, std::uint64_t seed) {
    if (m == 0) fail(ErrorCode::invalid_argument, "random baseline needs at least one generator");
    Rng rng(seed);
    std::vector<RoutingDecision> out(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        out[s].sample_id = std::to_string(s);
        out[s].chosen = static_cast<std::size_t>(rng.uniform_index(m));
        out[s].scores.assign(m, 1.0 / static_cast<double>(m));
        out[s].method = "random";
    }
    return out;
}

double random_expected_performance(std::span<const std::vector<double>> quality) {
    if (quality.empty()) fail(ErrorCode::empty_context, "no samples to average");
    const std::size_t m = quality.front().size();
    if (m == 0) fail(ErrorCode::invalid_argument, "quality rows are empty");
    double total = 0.0;
    for (const auto& row : quality) {
        if (row.size() != m) fail(ErrorCode::inconsistent_embeddings, "quality rows differ in length");
        for (double q : row) total += q;
    }
    // Mean of column means equals the grand mean for a rectangular matrix.
    return total / static_cast<double>(quality.size() * m);
}

std::size_t baseline_best_on_val(std::span<const LabeledExample> val) {
    if (val.empty()) fail(ErrorCode::empty_context, "validation set is empty");
    std::vector<std::size_t> rows(val.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return argmax_lowest(mean_quality(val, rows));
}

std::vector<RoutingDecision> baseline_labeled_knn(std::span<const LabeledExample> val,
                                                  std::span<const std::vector<double>> test_keys,
                                                  std::span<const std::string> test_ids, std::size_t k) {
    if (test_keys.size() != test_ids.size())
        fail(ErrorCode::invalid_argument, "test key count does not match test id count");
    if (k == 0) fail(ErrorCode::invalid_argument, "k must be positive");
    if (val.size() < k)
        fail(ErrorCode::neighborhood_too_large, "labeled set has " + std::to_string(val.size()) +
                                                    " examples, fewer than k = " + std::to_string(k));

    std::vector<std::vector<double>> keys;
    std::vector<std::string> ids;
    for (const auto& ex : val) {
        if (!ex.key) fail(ErrorCode::invalid_argument, "labeled example '" + ex.sample_id + "' has no key");
        keys.push_back(*ex.key);
        ids.push_back(ex.sample_id);
    }
    const auto index = NeighborIndex::build(std::move(keys), std::move(ids), DistanceMetric::cosine);

    std::vector<RoutingDecision> out(test_keys.size());
    for (std::size_t t = 0; t < test_keys.size(); ++t) {
        std::vector<std::size_t> rows;
        for (const auto& n : index.query(test_keys[t], k)) rows.push_back(n.position);
        std::sort(rows.begin(), rows.end());
        auto means = mean_quality(val, rows);
        out[t].sample_id = test_ids[t];
        out[t].chosen = argmax_lowest(means);
        out[t].scores = std::move(means);
        out[t].method = "labeled_knn";
    }
    return out;
}

}  // namespace routewise
