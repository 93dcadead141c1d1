#include <doctest.h>

#include "../support/oracles.hpp"

#include <routewise/error.hpp>
#include <routewise/estimator.hpp>
#include <routewise/knn.hpp>
#include <routewise/metrics.hpp>
#include <routewise/router.hpp>
#include <routewise/simulate.hpp>

#include <algorithm>
#include <numeric>
#include <random>

using namespace routewise;

namespace {

EmbeddingRecord make_record(std::string id, std::vector<std::vector<double>> vectors) {
    EmbeddingRecord r;
    r.sample_id = std::move(id);
    r.dim = vectors.front().size();
    for (const auto& v : vectors) r.values.insert(r.values.end(), v.begin(), v.end());
    return r;
}

DeltaMatrix exact_deltas_124() {
    // theta = (1, 2, 4), d = 4: delta_ij = d/(2 theta_i) + d/(2 theta_j).
    DeltaMatrix delta(3, 1);
    delta.set(0, 1, 3.0);
    delta.set(0, 2, 2.5);
    delta.set(1, 2, 1.5);
    return delta;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::invalid_argument;
}

SyntheticConfig two_region_config(std::uint64_t seed, std::size_t n) {
    SyntheticConfig c;
    c.n = n;
    c.m = 3;
    c.d = 64;
    c.region_theta = {{8.0, 1.0, 1.0}, {1.0, 8.0, 1.0}};
    c.regions = 2;
    c.seed = seed;
    return c;
}

double region_accuracy(const std::vector<ThetaEstimate>& estimates, const SyntheticDataset& data) {
    const auto best = data.best_generators();
    std::size_t hits = 0;
    for (std::size_t s = 0; s < estimates.size(); ++s) hits += argmax_lowest(estimates[s].scores) == best[s];
    return static_cast<double>(hits) / static_cast<double>(estimates.size());
}

}  // namespace

TEST_CASE("pairwise deltas of identical vectors are zero") {
    const auto r = make_record("a", {{1.5, -2.0}, {1.5, -2.0}, {1.5, -2.0}});
    const auto delta = pairwise_deltas(std::span(&r, 1));
    for (double v : delta.values()) CHECK(v == 0.0);
}

TEST_CASE("constant offset between two generators gives its squared norm exactly") {
    std::vector<EmbeddingRecord> records;
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> coord(-50, 50);
    for (int s = 0; s < 25; ++s) {
        std::vector<double> base{double(coord(gen)), double(coord(gen)), double(coord(gen))};
        std::vector<double> shifted{base[0] + 1.0, base[1] + 0.5, base[2] - 2.0};
        std::vector<double> other{double(coord(gen)), double(coord(gen)), double(coord(gen))};
        records.push_back(make_record("s" + std::to_string(s), {base, shifted, other}));
    }
    const auto delta = pairwise_deltas(records);
    CHECK(delta(0, 1) == 5.25);
    CHECK(delta(1, 0) == 5.25);
    CHECK(delta.context_size() == 25);
}

TEST_CASE("pairwise deltas match a direct double loop") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 3 + trial % 4, d = 1 + trial % 9, n = 1 + trial % 13;
        const auto records = oracle::random_records(gen, n, m, d);
        const auto delta = pairwise_deltas(records);
        const auto expected = oracle::deltas(records, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) CHECK(delta(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-12));
    }
}

TEST_CASE("Monte Carlo delta approaches d/(2 theta_i) + d/(2 theta_j)") {
    SyntheticConfig c;
    c.n = 100000;
    c.m = 3;
    c.d = 4;
    c.region_theta = {{1.0, 2.0, 4.0}};
    c.seed = 2024;
    const auto data = sample_dataset(c);
    const auto delta = pairwise_deltas(data.records);
    CHECK(oracle::relative_error(delta(0, 1), 3.0) <= 0.02);
    CHECK(oracle::relative_error(delta(0, 2), 2.5) <= 0.02);
    CHECK(oracle::relative_error(delta(1, 2), 1.5) <= 0.02);
}

TEST_CASE("pairwise delta errors") {
    std::vector<EmbeddingRecord> none;
    CHECK(code_of([&] { pairwise_deltas(none); }) == ErrorCode::empty_context);
    std::vector<EmbeddingRecord> mixed{make_record("a", {{1, 2}, {3, 4}, {5, 6}}),
                                       make_record("b", {{1, 2, 3}, {3, 4, 5}, {5, 6, 7}})};
    CHECK(code_of([&] { pairwise_deltas(mixed); }) == ErrorCode::inconsistent_embeddings);
}

TEST_CASE("triplet estimate examples") {
    SUBCASE("symmetric deltas give d / c") {
        DeltaMatrix delta(3, 1);
        delta.set(0, 1, 2.0);
        delta.set(0, 2, 2.0);
        delta.set(1, 2, 2.0);
        const auto t = triplet_theta(delta, 0, 1, 2, 8);
        CHECK(t.value == doctest::Approx(4.0));
        CHECK_FALSE(t.clamped);
    }
    SUBCASE("exact deltas from theta = (1, 2, 4)") {
        const auto delta = exact_deltas_124();
        CHECK(triplet_theta(delta, 0, 1, 2, 4).value == doctest::Approx(1.0));
        CHECK(triplet_theta(delta, 1, 0, 2, 4).value == doctest::Approx(2.0));
        CHECK(triplet_theta(delta, 2, 0, 1, 4).value == doctest::Approx(4.0));
    }
    SUBCASE("nonpositive denominator clamps") {
        DeltaMatrix delta(3, 1);
        delta.set(0, 1, 1.0);
        delta.set(0, 2, 1.0);
        delta.set(1, 2, 5.0);
        const auto t = triplet_theta(delta, 0, 1, 2, 4);
        CHECK(t.clamped);
        CHECK(t.value == 4.0 / denominator_floor(4));
    }
    SUBCASE("repeated indices are rejected") {
        const auto delta = exact_deltas_124();
        CHECK(code_of([&] { triplet_theta(delta, 0, 0, 2, 4); }) == ErrorCode::degenerate_triplet);
        CHECK(code_of([&] { triplet_theta(delta, 1, 2, 2, 4); }) == ErrorCode::degenerate_triplet);
    }
}

TEST_CASE("score vector from exact deltas recovers theta") {
    const auto spec = EnsembleSpec::with_default_names(3, 4);
    const auto scores = estimate_theta(exact_deltas_124(), spec);
    REQUIRE(scores.scores.size() == 3);
    CHECK(scores.scores[0] == doctest::Approx(1.0));
    CHECK(scores.scores[1] == doctest::Approx(2.0));
    CHECK(scores.scores[2] == doctest::Approx(4.0));
    CHECK(scores.clamped_triplets == 0);
}

TEST_CASE("identical generators clamp every triplet") {
    const std::size_t m = 5, d = 6;
    std::vector<EmbeddingRecord> records;
    for (int s = 0; s < 4; ++s) {
        std::vector<double> v(d, 0.25 * s);
        records.push_back(make_record("s" + std::to_string(s), std::vector<std::vector<double>>(m, v)));
    }
    const auto spec = EnsembleSpec::with_default_names(m, d);
    const auto est = estimate_global(records, spec);
    for (double s : est.scores) CHECK(s == static_cast<double>(d) / denominator_floor(d));
    CHECK(est.clamped_triplets == m * (m - 1) * (m - 2) / 2);
}

TEST_CASE("global estimate on one record equals the estimate from that record alone") {
    std::mt19937_64 gen(5);
    const auto records = oracle::random_records(gen, 1, 4, 8, true);
    const auto spec = EnsembleSpec::with_default_names(4, 8);
    const auto global = estimate_global(records, spec);
    const auto direct = estimate_theta(pairwise_deltas(records), spec);
    CHECK(global.scores == direct.scores);
    // The same record as a one-element training pool is the sole context.
    const auto train = estimate_train(records, records, spec, 1);
    CHECK(train.front().scores == global.scores);
}

TEST_CASE("global estimate matches the naive oracle") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m = 3 + trial % 5, d = 2 + trial % 7, n = 3 + trial % 11;
        const auto records = oracle::random_records(gen, n, m, d);
        const auto est = estimate_global(records, EnsembleSpec::with_default_names(m, d));
        const auto expected = oracle::theta_from_deltas(oracle::deltas(records, m), d);
        for (std::size_t g = 0; g < m; ++g) CHECK(est.scores[g] == doctest::Approx(expected[g]).epsilon(1e-9));
    }
}

TEST_CASE("global recovery on simulated data") {
    SyntheticConfig c;
    c.n = 2000;
    c.m = 5;
    c.d = 64;
    c.region_theta = {{0.5, 1.0, 2.0, 4.0, 8.0}};
    c.seed = 7;
    const auto data = sample_dataset(c);
    const auto est = estimate_global(data.records, data.spec);
    for (std::size_t g = 0; g < 5; ++g) CHECK(oracle::relative_error(est.scores[g], c.region_theta[0][g]) <= 0.05);
    CHECK(spearman_rho(est.scores, c.region_theta[0]) == 1.0);
}

TEST_CASE("global error does not grow with n in the median over seeds") {
    std::vector<double> medians;
    for (std::size_t n : {100, 1000, 10000}) {
        std::vector<double> errors;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            SyntheticConfig c;
            c.n = n;
            c.m = 4;
            c.d = 16;
            c.region_theta = {{0.5, 1.0, 2.0, 4.0}};
            c.seed = 1000 + seed;
            const auto data = sample_dataset(c);
            const auto est = estimate_global(data.records, data.spec);
            double worst = 0.0;
            for (std::size_t g = 0; g < c.m; ++g)
                worst = std::max(worst, oracle::relative_error(est.scores[g], c.region_theta[0][g]));
            errors.push_back(worst);
        }
        std::nth_element(errors.begin(), errors.begin() + 10, errors.end());
        medians.push_back(errors[10]);
    }
    CHECK(medians[1] <= medians[0]);
    CHECK(medians[2] <= medians[1]);
}

TEST_CASE("local with n0 = n - 1 is leave-one-out global, bit for bit") {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 9, m = 3 + trial % 3, d = 1 + trial % 5;
        const auto records = oracle::random_records(gen, n, m, d, trial % 2 == 0);
        const auto spec = EnsembleSpec::with_default_names(m, d);
        const auto index = build_neighbor_index(RecordSpan(records));
        const auto local = estimate_local(records, spec, index, n - 1);
        REQUIRE(local.size() == n);
        for (std::size_t s = 0; s < n; ++s) {
            std::vector<EmbeddingRecord> rest;
            for (std::size_t t = 0; t < n; ++t)
                if (t != s) rest.push_back(records[t]);
            CHECK(local[s].scores == estimate_global(rest, spec).scores);
            CHECK(local[s].sample_id == records[s].sample_id);
            CHECK(local[s].n0 == n - 1);
        }
    }
}

TEST_CASE("local and global agree in argmax on homogeneous data with n0 = n - 1") {
    SyntheticConfig c;
    c.n = 400;
    c.m = 4;
    c.d = 32;
    c.region_theta = {{0.5, 1.0, 2.0, 4.0}};
    c.seed = 99;
    const auto data = sample_dataset(c);
    const auto index = build_neighbor_index(RecordSpan(data.records));
    const auto local = estimate_local(data.records, data.spec, index, c.n - 1);
    const auto global = estimate_global(data.records, data.spec);
    for (const auto& e : local) CHECK(argmax_lowest(e.scores) == argmax_lowest(global.scores));
}

TEST_CASE("local estimate on two-region data picks the region's best generator") {
    const auto data = sample_piecewise(two_region_config(31, 1000));
    const auto index = build_neighbor_index(RecordSpan(data.records));
    const auto local = estimate_local(data.records, data.spec, index, 5);
    CHECK(region_accuracy(local, data) >= 0.95);
}

TEST_CASE("two identical records see each other") {
    std::mt19937_64 gen(8);
    auto records = oracle::random_records(gen, 1, 3, 4);
    records.push_back(records.front());
    records.back().sample_id = "twin";
    const auto spec = EnsembleSpec::with_default_names(3, 4);
    const auto index = build_neighbor_index(RecordSpan(records));
    const auto local = estimate_local(records, spec, index, 1);
    CHECK(local[0].scores == local[1].scores);
    CHECK(local[0].scores == estimate_theta(pairwise_deltas(std::span(&records[1], 1)), spec).scores);
}

TEST_CASE("local estimate preconditions") {
    std::mt19937_64 gen(9);
    const auto records = oracle::random_records(gen, 4, 3, 2);
    const auto spec = EnsembleSpec::with_default_names(3, 2);
    const auto index = build_neighbor_index(RecordSpan(records));
    CHECK(code_of([&] { estimate_local(records, spec, index, 4); }) == ErrorCode::neighborhood_too_large);
    CHECK(code_of([&] { estimate_local(records, spec, index, 0); }) == ErrorCode::invalid_argument);
    const auto one = oracle::random_records(gen, 1, 3, 2);
    const auto one_index = build_neighbor_index(RecordSpan(one));
    CHECK(code_of([&] { estimate_local(one, spec, one_index, 1); }) == ErrorCode::neighborhood_too_large);
}

TEST_CASE("neighbor keys fall back to generator centroids without input keys") {
    auto r = make_record("a", {{0.0, 3.0}, {3.0, 0.0}, {3.0, 3.0}});
    const auto keys = neighbor_keys(RecordSpan(std::span(&r, 1)));
    REQUIRE(keys.size() == 1);
    CHECK(keys[0] == std::vector<double>{2.0, 2.0});
    r.input_key = std::vector<double>{7.0};
    CHECK(neighbor_keys(RecordSpan(std::span(&r, 1)))[0] == std::vector<double>{7.0});
}

TEST_CASE("train mode with a saturated pool is the pool's global estimate") {
    std::mt19937_64 gen(41);
    const auto pool = oracle::random_records(gen, 12, 4, 5, true);
    const auto test = oracle::random_records(gen, 30, 4, 5, true);
    const auto spec = EnsembleSpec::with_default_names(4, 5);
    const auto train = estimate_train(test, pool, spec, pool.size());
    const auto global = estimate_global(pool, spec);
    for (const auto& e : train) CHECK(e.scores == global.scores);
}

TEST_CASE("train mode with a single-region pool scores every test sample as that region") {
    auto cfg = two_region_config(5, 600);
    const auto data = sample_piecewise(cfg);
    std::vector<EmbeddingRecord> pool, test;
    for (std::size_t s = 0; s < data.records.size(); ++s)
        (data.region_labels[s] == 0 && pool.size() < 40 ? pool : test).push_back(data.records[s]);
    const auto train = estimate_train(test, pool, data.spec, pool.size());
    const auto region = estimate_global(pool, data.spec);
    for (const auto& e : train) {
        CHECK(e.scores == region.scores);
        CHECK(argmax_lowest(e.scores) == 0);
    }
}

TEST_CASE("train mode routes region-optimally without reading test embeddings") {
    const auto data = sample_piecewise(two_region_config(77, 1250));
    std::vector<EmbeddingRecord> pool(data.records.begin(), data.records.begin() + 250);
    std::vector<EmbeddingRecord> test(data.records.begin() + 250, data.records.end());
    oracle::CountingSource test_source(test);
    const auto train = estimate_train(test_source, RecordSpan(pool), data.spec, 20);
    CHECK(test_source.embedding_reads == 0);
    CHECK(test_source.key_reads > 0);
    const auto best = data.best_generators();
    std::size_t hits = 0;
    for (std::size_t s = 0; s < train.size(); ++s) hits += argmax_lowest(train[s].scores) == best[250 + s];
    CHECK(static_cast<double>(hits) / static_cast<double>(train.size()) >= 0.90);
}

TEST_CASE("train mode preconditions") {
    std::mt19937_64 gen(2);
    const auto pool = oracle::random_records(gen, 5, 3, 2, true);
    const auto test = oracle::random_records(gen, 3, 3, 2, true);
    const auto spec = EnsembleSpec::with_default_names(3, 2);
    std::vector<EmbeddingRecord> empty;
    CHECK(code_of([&] { estimate_train(test, empty, spec, 1); }) == ErrorCode::empty_pool);
    CHECK(code_of([&] { estimate_train(test, pool, spec, 6); }) == ErrorCode::neighborhood_too_large);
    const auto keyless = oracle::random_records(gen, 3, 3, 2, false);
    CHECK(code_of([&] { estimate_train(keyless, pool, spec, 1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("scale covariance over random instances") {
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 3 + trial % 4, d = 1 + trial % 6, n = 2 + trial % 7;
        auto records = oracle::random_records(gen, n, m, d);
        const auto spec = EnsembleSpec::with_default_names(m, d);
        const auto base_delta = pairwise_deltas(records);
        const auto base = estimate_global(records, spec);
        const double s = scale(gen);
        for (auto& r : records)
            for (double& x : r.values) x *= s;
        const auto delta = pairwise_deltas(records);
        const auto scaled = estimate_global(records, spec);
        for (std::size_t i = 0; i < m * m; ++i)
            REQUIRE(delta.values()[i] == doctest::Approx(s * s * base_delta.values()[i]).epsilon(1e-9));
        if (base.clamped_triplets != 0 || scaled.clamped_triplets != 0) continue;
        for (std::size_t g = 0; g < m; ++g)
            REQUIRE(scaled.scores[g] == doctest::Approx(base.scores[g] / (s * s)).epsilon(1e-8));
        REQUIRE(argmax_lowest(scaled.scores) == argmax_lowest(base.scores));
    }
}

TEST_CASE("permutation equivariance over random instances") {
    std::mt19937_64 gen(202);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 3 + trial % 5, d = 1 + trial % 6, n = 1 + trial % 7;
        const auto records = oracle::random_records(gen, n, m, d);
        const auto spec = EnsembleSpec::with_default_names(m, d);
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), gen);
        auto permuted = records;
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t g = 0; g < m; ++g) {
                const auto src = records[s].embedding(perm[g]);
                std::copy(src.begin(), src.end(), permuted[s].embedding(g).begin());
            }
        const auto base = estimate_global(records, spec);
        const auto moved = estimate_global(permuted, spec);
        for (std::size_t g = 0; g < m; ++g)
            REQUIRE(moved.scores[g] == doctest::Approx(base.scores[perm[g]]).epsilon(1e-10));
    }
}

TEST_CASE("translation invariance over random instances") {
    std::mt19937_64 gen(303);
    std::normal_distribution<double> offset(0.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 3 + trial % 4, d = 1 + trial % 6, n = 1 + trial % 7;
        auto records = oracle::random_records(gen, n, m, d);
        const auto spec = EnsembleSpec::with_default_names(m, d);
        const auto base_delta = pairwise_deltas(records);
        const auto base = estimate_global(records, spec);
        std::vector<double> t(d);
        for (double& x : t) x = offset(gen);
        for (auto& r : records)
            for (std::size_t g = 0; g < m; ++g)
                for (std::size_t c = 0; c < d; ++c) r.embedding(g)[c] += t[c];
        const auto delta = pairwise_deltas(records);
        const auto moved = estimate_global(records, spec);
        for (std::size_t i = 0; i < m * m; ++i)
            REQUIRE(delta.values()[i] == doctest::Approx(base_delta.values()[i]).epsilon(1e-8).scale(1.0));
        if (base.clamped_triplets != 0 || moved.clamped_triplets != 0) continue;
        for (std::size_t g = 0; g < m; ++g)
            REQUIRE(moved.scores[g] == doctest::Approx(base.scores[g]).epsilon(1e-6));
    }
}

TEST_CASE("repeated estimation is bit-identical") {
    std::mt19937_64 gen(404);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 3 + trial % 4, d = 1 + trial % 6, n = 3 + trial % 9;
        const auto records = oracle::random_records(gen, n, m, d, trial % 2 == 0);
        const auto spec = EnsembleSpec::with_default_names(m, d);
        const auto index = build_neighbor_index(RecordSpan(records));
        const auto a = estimate_local(records, spec, index, 1 + trial % (n - 1));
        const auto b = estimate_local(records, spec, index, 1 + trial % (n - 1));
        for (std::size_t s = 0; s < n; ++s) REQUIRE(a[s].scores == b[s].scores);
        REQUIRE(estimate_global(records, spec).scores == estimate_global(records, spec).scores);
    }
}
