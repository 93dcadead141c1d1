#include "routewise/estimator.hpp"

#include "routewise/error.hpp"
#include "routewise/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace routewise {

namespace {

std::size_t pair_count(std::size_t m) { return m * (m - 1) / 2; }

// Per-sample pair distances for every sample, one row of pair_count(m) each.
struct PairTable {
    std::size_t m = 0;
    std::size_t pairs = 0;
    std::vector<double> rows;

    std::span<const double> row(std::size_t sample) const {
        return {rows.data() + sample * pairs, pairs};
    }
};

void check_shape(const SampleSource& samples) {
    if (samples.size() == 0) fail(ErrorCode::empty_context, "empty context");
    const std::size_t m = samples.generators();
    const std::size_t d = samples.dim();
    if (m == 0 || d == 0) fail(ErrorCode::inconsistent_embeddings, "inconsistent embeddings: zero-sized record");
    for (std::size_t s = 0; s < samples.size(); ++s)
        for (std::size_t g = 0; g < m; ++g) {
            const auto v = samples.embedding(s, g);
            if (v.size() != d)
                fail(ErrorCode::inconsistent_embeddings,
                     "inconsistent embeddings in sample '" + samples.id(s) + "'");
            for (double x : v)
                if (!std::isfinite(x))
                    fail(ErrorCode::inconsistent_embeddings,
                         "non-finite embedding coordinate in sample '" + samples.id(s) + "'");
        }
}

PairTable build_pair_table(const SampleSource& samples) {
    PairTable table;
    table.m = samples.generators();
    table.pairs = pair_count(table.m);
    table.rows.resize(samples.size() * table.pairs);
    parallel_for(samples.size(), [&](std::size_t s) {
        const auto row = sample_pair_distances(samples, s);
        std::copy(row.begin(), row.end(), table.rows.begin() + static_cast<std::ptrdiff_t>(s * table.pairs));
    });
    return table;
}

// Context rows are summed in ascending sample order so that the same context
// always produces the same bits, whatever order the neighbors came back in.
DeltaMatrix average_rows(const PairTable& table, std::span<const std::size_t> sorted_positions) {
    std::vector<double> sums(table.pairs, 0.0);
    for (std::size_t s : sorted_positions) {
        const auto row = table.row(s);
        for (std::size_t p = 0; p < table.pairs; ++p) sums[p] += row[p];
    }
    const double count = static_cast<double>(sorted_positions.size());
    DeltaMatrix delta(table.m, sorted_positions.size());
    std::size_t p = 0;
    for (std::size_t i = 0; i < table.m; ++i)
        for (std::size_t j = i + 1; j < table.m; ++j) delta.set(i, j, sums[p++] / count);
    return delta;
}

void check_spec_matches(const SampleSource& samples, const EnsembleSpec& spec) {
    spec.validate();
    if (samples.generators() != spec.generators() || samples.dim() != spec.embedding_dim)
        fail(ErrorCode::inconsistent_embeddings,
             "inconsistent embeddings: records have " + std::to_string(samples.generators()) +
                 " generators of dimension " + std::to_string(samples.dim()) + ", ensemble expects " +
                 std::to_string(spec.generators()) + " of dimension " + std::to_string(spec.embedding_dim));
}

ThetaEstimate make_estimate(std::string id, ScoreVector scores, EstimateMode mode,
                            std::optional<std::size_t> n0) {
    ThetaEstimate out;
    out.sample_id = std::move(id);
    out.scores = std::move(scores.scores);
    out.clamped_triplets = scores.clamped_triplets;
    out.mode = mode;
    out.n0 = n0;
    return out;
}

std::vector<std::size_t> sorted_positions(const std::vector<Neighbor>& neighbors) {
    std::vector<std::size_t> positions;
    positions.reserve(neighbors.size());
    for (const auto& n : neighbors) positions.push_back(n.position);
    std::sort(positions.begin(), positions.end());
    return positions;
}

}  // namespace

std::size_t RecordSpan::generators() const {
    return records_.empty() ? 0 : records_.front().generators();
}

std::size_t RecordSpan::dim() const { return records_.empty() ? 0 : records_.front().dim; }

std::span<const double> RecordSpan::input_key(std::size_t sample) const {
    const auto& key = records_[sample].input_key;
    if (!key) fail(ErrorCode::invalid_argument, "sample '" + records_[sample].sample_id + "' has no input key");
    return *key;
}

std::span<const double> RecordSpan::embedding(std::size_t sample, std::size_t generator) const {
    const auto& record = records_[sample];
    if ((generator + 1) * record.dim > record.values.size())
        fail(ErrorCode::inconsistent_embeddings, "inconsistent embeddings in sample '" + record.sample_id + "'");
    return record.embedding(generator);
}

std::vector<double> sample_pair_distances(const SampleSource& samples, std::size_t sample) {
    const std::size_t m = samples.generators();
    std::vector<double> out;
    out.reserve(pair_count(m));
    for (std::size_t i = 0; i < m; ++i) {
        const auto a = samples.embedding(sample, i);
        for (std::size_t j = i + 1; j < m; ++j)
            out.push_back(distance(DistanceMetric::euclidean, a, samples.embedding(sample, j)));
    }
    return out;
}

DeltaMatrix pairwise_deltas(const SampleSource& samples) {
    check_shape(samples);
    const auto table = build_pair_table(samples);
    std::vector<std::size_t> all(samples.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return average_rows(table, all);
}

DeltaMatrix pairwise_deltas(std::span<const EmbeddingRecord> records) {
    if (records.empty()) fail(ErrorCode::empty_context, "empty context");
    const auto& first = records.front();
    for (const auto& r : records)
        if (r.dim != first.dim || r.values.size() != first.values.size() || r.dim == 0)
            fail(ErrorCode::inconsistent_embeddings, "inconsistent embeddings in sample '" + r.sample_id + "'");
    return pairwise_deltas(RecordSpan(records));
}

TripletTheta triplet_theta(const DeltaMatrix& delta, std::size_t i, std::size_t j, std::size_t k,
                           std::size_t d) {
    const std::size_t m = delta.size();
    if (i == j || i == k || j == k)
        fail(ErrorCode::degenerate_triplet, "degenerate triplet: indices must be pairwise distinct");
    if (i >= m || j >= m || k >= m) fail(ErrorCode::invalid_argument, "triplet index out of range");
    if (d == 0) fail(ErrorCode::invalid_argument, "embedding dimension must be >= 1");

    const double floor = denominator_floor(d);
    const double denominator = delta(i, j) + delta(i, k) - delta(j, k);
    if (!(denominator > floor)) return {static_cast<double>(d) / floor, true};
    return {static_cast<double>(d) / denominator, false};
}

ScoreVector estimate_theta(const DeltaMatrix& delta, const EnsembleSpec& spec) {
    spec.validate();
    const std::size_t m = spec.generators();
    if (delta.size() != m)
        fail(ErrorCode::inconsistent_embeddings, "delta matrix is " + std::to_string(delta.size()) +
                                                     "x" + std::to_string(delta.size()) + " but ensemble has " +
                                                     std::to_string(m) + " generators");
    delta.validate();

    ScoreVector out;
    out.scores.assign(m, 0.0);
    const double pairs = static_cast<double>((m - 1) * (m - 2) / 2);
    for (std::size_t i = 0; i < m; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            for (std::size_t k = j + 1; k < m; ++k) {
                if (k == i) continue;
                const auto t = triplet_theta(delta, i, j, k, spec.embedding_dim);
                sum += t.value;
                out.clamped_triplets += t.clamped ? 1 : 0;
            }
        }
        out.scores[i] = sum / pairs;
    }
    return out;
}

ThetaEstimate estimate_global(std::span<const EmbeddingRecord> records, const EnsembleSpec& spec) {
    const RecordSpan samples(records);
    if (records.empty()) fail(ErrorCode::empty_context, "empty context");
    check_spec_matches(samples, spec);
    return make_estimate("", estimate_theta(pairwise_deltas(samples), spec), EstimateMode::global,
                         std::nullopt);
}

std::vector<ThetaEstimate> estimate_global_per_sample(std::span<const EmbeddingRecord> records,
                                                      const EnsembleSpec& spec) {
    const auto shared = estimate_global(records, spec);
    std::vector<ThetaEstimate> out(records.size(), shared);
    for (std::size_t s = 0; s < records.size(); ++s) out[s].sample_id = records[s].sample_id;
    return out;
}

std::vector<std::vector<double>> neighbor_keys(const SampleSource& samples) {
    bool all_keyed = samples.size() > 0;
    for (std::size_t s = 0; s < samples.size() && all_keyed; ++s) all_keyed = samples.has_input_key(s);

    std::vector<std::vector<double>> keys(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) {
        if (all_keyed) {
            const auto key = samples.input_key(s);
            keys[s].assign(key.begin(), key.end());
            continue;
        }
        auto& centroid = keys[s];
        centroid.assign(samples.dim(), 0.0);
        for (std::size_t g = 0; g < samples.generators(); ++g) {
            const auto v = samples.embedding(s, g);
            for (std::size_t c = 0; c < centroid.size(); ++c) centroid[c] += v[c];
        }
        for (double& c : centroid) c /= static_cast<double>(samples.generators());
    }
    return keys;
}

NeighborIndex build_neighbor_index(const SampleSource& samples, DistanceMetric metric) {
    std::vector<std::string> ids;
    ids.reserve(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) ids.push_back(samples.id(s));
    return NeighborIndex::build(neighbor_keys(samples), std::move(ids), metric);
}

std::vector<ThetaEstimate> estimate_local(const SampleSource& samples, const EnsembleSpec& spec,
                                          const NeighborIndex& neighbors, std::size_t n0) {
    check_shape(samples);
    check_spec_matches(samples, spec);
    const std::size_t n = samples.size();
    if (n0 == 0) fail(ErrorCode::invalid_argument, "n0 must be a positive integer");
    if (n0 >= n)
        fail(ErrorCode::neighborhood_too_large, "neighborhood too large: n0 = " + std::to_string(n0) +
                                                    " but only " + std::to_string(n) +
                                                    " samples (n0 < n required)");
    if (neighbors.size() != n)
        fail(ErrorCode::invalid_argument, "neighbor index does not cover the same samples");
    for (std::size_t s = 0; s < n; ++s)
        if (neighbors.id(s) != samples.id(s))
            fail(ErrorCode::invalid_argument, "neighbor index order differs from sample order at '" +
                                                  samples.id(s) + "'");

    const auto table = build_pair_table(samples);
    std::vector<ThetaEstimate> out(n);
    parallel_for(n, [&](std::size_t s) {
        const auto hits = neighbors.query(neighbors.key(s), n0, samples.id(s));
        const auto context = sorted_positions(hits);
        out[s] = make_estimate(samples.id(s), estimate_theta(average_rows(table, context), spec),
                               EstimateMode::local, n0);
    });
    return out;
}

std::vector<ThetaEstimate> estimate_local(std::span<const EmbeddingRecord> records,
                                          const EnsembleSpec& spec, const NeighborIndex& neighbors,
                                          std::size_t n0) {
    return estimate_local(RecordSpan(records), spec, neighbors, n0);
}

std::vector<ThetaEstimate> estimate_train(const SampleSource& test, const SampleSource& pool,
                                          const EnsembleSpec& spec, std::size_t n0,
                                          DistanceMetric metric) {
    if (pool.size() == 0) fail(ErrorCode::empty_pool, "train pool is empty");
    check_shape(pool);
    check_spec_matches(pool, spec);
    if (n0 == 0) fail(ErrorCode::invalid_argument, "n0 must be a positive integer");
    if (n0 > pool.size())
        fail(ErrorCode::neighborhood_too_large, "neighborhood too large: n0 = " + std::to_string(n0) +
                                                    " exceeds train pool size " + std::to_string(pool.size()));

    std::vector<std::vector<double>> pool_keys(pool.size());
    std::vector<std::string> pool_ids(pool.size());
    for (std::size_t s = 0; s < pool.size(); ++s) {
        if (!pool.has_input_key(s))
            fail(ErrorCode::invalid_argument, "train mode needs an input key for pool sample '" + pool.id(s) + "'");
        const auto key = pool.input_key(s);
        pool_keys[s].assign(key.begin(), key.end());
        pool_ids[s] = pool.id(s);
    }
    const auto index = NeighborIndex::build(std::move(pool_keys), std::move(pool_ids), metric);
    const auto table = build_pair_table(pool);

    for (std::size_t s = 0; s < test.size(); ++s)
        if (!test.has_input_key(s))
            fail(ErrorCode::invalid_argument, "train mode needs an input key for test sample '" + test.id(s) + "'");

    std::vector<ThetaEstimate> out(test.size());
    parallel_for(test.size(), [&](std::size_t s) {
        const auto context = sorted_positions(index.query(test.input_key(s), n0));
        out[s] = make_estimate(test.id(s), estimate_theta(average_rows(table, context), spec),
                               EstimateMode::train, n0);
    });
    return out;
}

std::vector<ThetaEstimate> estimate_train(std::span<const EmbeddingRecord> test,
                                          std::span<const EmbeddingRecord> pool,
                                          const EnsembleSpec& spec, std::size_t n0,
                                          DistanceMetric metric) {
    return estimate_train(RecordSpan(test), RecordSpan(pool), spec, n0, metric);
}

}  // namespace routewise
