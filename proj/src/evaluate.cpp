#include "routewise/evaluate.hpp"

#include "routewise/error.hpp"
#include "routewise/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace routewise {

namespace {

double column_mean(std::span<const std::vector<double>> quality, std::size_t g) {
    double sum = 0.0;
    for (const auto& row : quality) sum += row[g];
    return sum / static_cast<double>(quality.size());
}

}  // namespace

std::vector<std::vector<double>> quality_matrix(const std::vector<LabelEntry>& labels,
                                                const std::vector<GenerationEntry>* generations,
                                                TaskMetric metric) {
    if (generations && generations->size() != labels.size())
        fail(ErrorCode::inconsistent_embeddings, "labels and generations differ in sample count");
    std::vector<std::vector<double>> out;
    out.reserve(labels.size());
    for (std::size_t s = 0; s < labels.size(); ++s) {
        const auto& label = labels[s];
        if (label.quality) {
            out.push_back(*label.quality);
            continue;
        }
        if (!generations)
            fail(ErrorCode::invalid_argument,
                 "sample '" + label.sample_id + "' has no quality vector and no generations to score");
        const auto& gen = (*generations)[s];
        if (gen.sample_id != label.sample_id)
            fail(ErrorCode::inconsistent_embeddings, "label and generation ids differ at '" + label.sample_id + "'");
        std::vector<double> row;
        for (const auto& text : gen.texts) {
            if (metric == TaskMetric::contains) {
                row.push_back(accuracy_contains(text, label.references));
            } else {
                double best = 0.0;
                for (const auto& ref : label.references) best = std::max(best, rouge2_f1(text, ref));
                row.push_back(best);
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

EvalReport evaluate_against_truth(const EstimatesFile& estimates, const TruthFile& truth) {
    if (estimates.generator_names != truth.generator_names)
        fail(ErrorCode::inconsistent_embeddings, "estimate and truth files list different generators");
    if (estimates.estimates.size() != truth.sample_ids.size())
        fail(ErrorCode::inconsistent_embeddings, "estimate and truth files differ in sample count");

    EvalReport report;
    report.samples = truth.sample_ids.size();
    double rho_sum = 0.0;
    std::size_t rho_count = 0;
    double worst_error = 0.0;
    std::size_t argmax_hits = 0;
    for (std::size_t s = 0; s < truth.sample_ids.size(); ++s) {
        const auto& est = estimates.estimates[s];
        if (est.sample_id != truth.sample_ids[s])
            fail(ErrorCode::inconsistent_embeddings, "estimate ids differ from truth ids at '" + est.sample_id + "'");
        const auto& theta = truth.theta[s];
        try {
            rho_sum += spearman_rho(est.scores, theta);
            ++rho_count;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::undefined_value) throw;
        }
        for (std::size_t g = 0; g < theta.size(); ++g)
            worst_error = std::max(worst_error, std::abs(est.scores[g] - theta[g]) / theta[g]);
        argmax_hits += argmax_lowest(est.scores) == argmax_lowest(theta) ? 1 : 0;
    }
    if (rho_count > 0) report.spearman = rho_sum / static_cast<double>(rho_count);
    report.metrics["max_relative_error_pct"] = 100.0 * worst_error;
    report.metrics["argmax_accuracy"] = 100.0 * static_cast<double>(argmax_hits) /
                                        static_cast<double>(std::max<std::size_t>(report.samples, 1));
    return report;
}

EvalReport evaluate_routing(std::span<const RoutingDecision> decisions,
                            std::span<const std::vector<double>> quality, const ValidationSet* validation,
                            std::span<const std::vector<double>> test_keys) {
    if (decisions.size() != quality.size())
        fail(ErrorCode::inconsistent_embeddings, "routing decisions and quality rows differ in count");
    if (quality.empty()) fail(ErrorCode::empty_context, "nothing to evaluate");
    const std::size_t m = quality.front().size();

    EvalReport report;
    report.samples = quality.size();
    double routed = 0.0, oracle = 0.0;
    for (std::size_t s = 0; s < quality.size(); ++s) {
        if (quality[s].size() != m) fail(ErrorCode::inconsistent_embeddings, "quality rows differ in length");
        if (decisions[s].chosen >= m) fail(ErrorCode::invalid_argument, "decision index out of range");
        routed += quality[s][decisions[s].chosen];
        oracle += *std::max_element(quality[s].begin(), quality[s].end());
    }
    const double n = static_cast<double>(quality.size());
    report.metrics["routed"] = 100.0 * routed / n;
    report.metrics["oracle"] = 100.0 * oracle / n;
    report.metrics["random_expected"] = 100.0 * random_expected_performance(quality);
    double best_single = 0.0;
    for (std::size_t g = 0; g < m; ++g) best_single = std::max(best_single, column_mean(quality, g));
    report.metrics["best_single"] = 100.0 * best_single;
    report.rank_histogram = rank_histogram(quality, decisions);

    if (validation && !validation->examples.empty()) {
        const auto& val = validation->examples;
        const std::size_t size = std::min(validation->sample_size, val.size());
        Rng rng(validation->seed);
        double total = 0.0;
        for (std::size_t draw = 0; draw < validation->draws; ++draw) {
            // Partial Fisher-Yates for a sample without replacement.
            std::vector<std::size_t> order(val.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t i = 0; i < size; ++i)
                std::swap(order[i], order[i + rng.uniform_index(order.size() - i)]);
            std::vector<LabeledExample> subset;
            for (std::size_t i = 0; i < size; ++i) subset.push_back(val[order[i]]);
            total += column_mean(quality, baseline_best_on_val(subset));
        }
        if (validation->draws > 0)
            report.metrics["best_on_val"] = 100.0 * total / static_cast<double>(validation->draws);

        if (!test_keys.empty()) {
            std::vector<std::string> ids;
            for (const auto& d : decisions) ids.push_back(d.sample_id);
            const auto knn = baseline_labeled_knn(val, test_keys, ids, std::min(validation->knn_k, val.size()));
            double score = 0.0;
            for (std::size_t s = 0; s < knn.size(); ++s) score += quality[s][knn[s].chosen];
            report.metrics["labeled_knn"] = 100.0 * score / n;
        }
    }
    return report;
}

}  // namespace routewise
