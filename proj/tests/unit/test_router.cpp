#include <doctest.h>

#include "../support/oracles.hpp"

#include <routewise/error.hpp>
#include <routewise/estimator.hpp>
#include <routewise/router.hpp>
#include <routewise/simulate.hpp>

#include <cmath>
#include <random>

using namespace routewise;

namespace {

ThetaEstimate scores(std::vector<double> s) {
    ThetaEstimate e;
    e.sample_id = "x";
    e.scores = std::move(s);
    return e;
}

LabeledExample example(std::string id, std::vector<double> quality, std::optional<std::vector<double>> key = {}) {
    return {std::move(id), "", std::move(quality), std::move(key)};
}

}  // namespace

TEST_CASE("argmax routing breaks ties toward the lowest index") {
    CHECK(route_argmax(scores({0.2, 0.9, 0.9})).chosen == 1);
    CHECK(route_argmax(scores({5.0, 1.0, 1.0})).chosen == 0);
    const auto d = route_argmax(scores({1.0, 3.0, 2.0}));
    CHECK(d.sample_id == "x");
    CHECK(d.method == "global");
    CHECK(d.scores == std::vector<double>{1.0, 3.0, 2.0});
}

TEST_CASE("argmax routing is invariant to increasing transforms") {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> u(0.01, 100.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> s(3 + trial % 6);
        for (double& x : s) x = u(gen);
        if (trial % 7 == 0) s[1] = s[0];
        std::vector<double> t;
        for (double x : s) t.push_back(std::log(x) * 3.0 + 1.0);
        const auto a = route_argmax(scores(s)).chosen;
        REQUIRE(a == route_argmax(scores(t)).chosen);
        REQUIRE(a < s.size());
    }
}

TEST_CASE("route_all gives one decision per sample") {
    std::vector<ThetaEstimate> all{scores({1, 2, 3}), scores({3, 2, 1})};
    all[1].sample_id = "y";
    const auto d = route_all(all);
    REQUIRE(d.size() == 2);
    CHECK(d[0].chosen == 2);
    CHECK(d[1].chosen == 0);
    CHECK(d[1].sample_id == "y");
}

TEST_CASE("random baseline") {
    SUBCASE("one generator always routes to it") {
        for (const auto& d : baseline_random(50, 1, 3)) CHECK(d.chosen == 0);
    }
    SUBCASE("seeded runs repeat") {
        const auto a = baseline_random(200, 5, 42), b = baseline_random(200, 5, 42);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].chosen == b[i].chosen);
            CHECK(a[i].chosen < 5);
        }
    }
    SUBCASE("expected performance is the mean accuracy") {
        const std::vector<std::vector<double>> q{{0.2, 0.4, 0.6}};
        CHECK(random_expected_performance(q) == doctest::Approx(0.4));
    }
    SUBCASE("empirical mean stays within three standard errors") {
        // 0/1 quality: column means are 0.2, 0.4, 0.6 over 1000 samples.
        std::vector<std::vector<double>> q;
        std::mt19937_64 gen(12);
        for (int s = 0; s < 1000; ++s) {
            std::vector<double> row;
            for (double p : {0.2, 0.4, 0.6}) row.push_back(std::bernoulli_distribution(p)(gen) ? 1.0 : 0.0);
            q.push_back(row);
        }
        const double expected = random_expected_performance(q);
        double total = 0.0;
        for (std::uint64_t trial = 0; trial < 10; ++trial) {
            const auto d = baseline_random(q.size(), 3, 500 + trial);
            double acc = 0.0;
            for (std::size_t s = 0; s < q.size(); ++s) acc += q[s][d[s].chosen];
            total += acc / static_cast<double>(q.size());
        }
        // Each draw is a Bernoulli(expected) over 1000 samples; averaged over 10 trials.
        const double sigma = std::sqrt(expected * (1.0 - expected) / (1000.0 * 10.0));
        CHECK(std::abs(total / 10.0 - expected) <= 3.0 * sigma);
    }
}

TEST_CASE("best on validation") {
    std::vector<LabeledExample> one{example("a", {0.1, 0.7, 0.3})};
    CHECK(baseline_best_on_val(one) == 1);
    std::vector<LabeledExample> tie{example("a", {1.0, 0.0}), example("b", {0.0, 1.0})};
    CHECK(baseline_best_on_val(tie) == 0);
    std::vector<LabeledExample> none;
    CHECK_THROWS_AS(baseline_best_on_val(none), Error);
}

TEST_CASE("best on validation converges to the true best generator") {
    // Quality is 1 with probability p_g; generator 2 is best.
    const std::vector<double> p{0.55, 0.6, 0.7};
    std::mt19937_64 gen(19);
    auto correct_rate = [&](std::size_t size) {
        std::size_t hits = 0;
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<LabeledExample> val;
            for (std::size_t s = 0; s < size; ++s) {
                std::vector<double> q;
                for (double pg : p) q.push_back(std::bernoulli_distribution(pg)(gen) ? 1.0 : 0.0);
                val.push_back(example("v" + std::to_string(s), q));
            }
            hits += baseline_best_on_val(val) == 2;
        }
        return static_cast<double>(hits) / 200.0;
    };
    const double small = correct_rate(10), large = correct_rate(1000);
    CHECK(large >= small);
    CHECK(large >= 0.99);
}

TEST_CASE("labeled KNN") {
    SUBCASE("k equal to the validation size reduces to best on validation") {
        std::mt19937_64 gen(4);
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> u;
        std::vector<LabeledExample> val;
        for (int s = 0; s < 30; ++s)
            val.push_back(example("v" + std::to_string(s), {u(gen), u(gen), u(gen), u(gen)},
                                  std::vector<double>{normal(gen), normal(gen)}));
        std::vector<std::vector<double>> keys;
        std::vector<std::string> ids;
        for (int s = 0; s < 20; ++s) {
            keys.push_back({normal(gen), normal(gen)});
            ids.push_back("t" + std::to_string(s));
        }
        const auto best = baseline_best_on_val(val);
        for (const auto& d : baseline_labeled_knn(val, keys, ids, val.size())) CHECK(d.chosen == best);
    }
    SUBCASE("two clusters route to their own best generator") {
        std::vector<LabeledExample> val;
        for (int s = 0; s < 10; ++s) {
            val.push_back(example("a" + std::to_string(s), {1.0, 0.0}, std::vector<double>{1.0, 0.01 * s}));
            val.push_back(example("b" + std::to_string(s), {0.0, 1.0}, std::vector<double>{0.01 * s, 1.0}));
        }
        const std::vector<std::vector<double>> keys{{2.0, 0.1}, {0.1, 3.0}};
        const std::vector<std::string> ids{"near_a", "near_b"};
        const auto d = baseline_labeled_knn(val, keys, ids, 5);
        CHECK(d[0].chosen == 0);
        CHECK(d[1].chosen == 1);
        CHECK(d[0].method == "labeled_knn");
    }
    SUBCASE("too few labeled examples") {
        std::vector<LabeledExample> val{example("a", {1.0, 0.0}, std::vector<double>{1.0})};
        const std::vector<std::vector<double>> keys{{1.0}};
        const std::vector<std::string> ids{"t"};
        CHECK_THROWS_AS(baseline_labeled_knn(val, keys, ids, 2), Error);
    }
}

TEST_CASE("labeled KNN sits between random and local routing on piecewise data") {
    // Ten regions alternate two swapped profiles, so 50 labels give about
    // five per region and k = 20 neighbors span several regions.
    SyntheticConfig c;
    c.n = 600;
    c.m = 3;
    c.d = 64;
    c.region_theta = {{8.0, 1.0, 1.0}, {1.0, 8.0, 1.0}};
    c.regions = 10;
    c.seed = 13;
    const auto data = sample_piecewise(c);
    const auto best = data.best_generators();
    // Quality of a generator is 1 where it is the region's best.
    std::vector<std::vector<double>> quality;
    for (std::size_t s = 0; s < c.n; ++s) {
        std::vector<double> q(c.m, 0.0);
        q[best[s]] = 1.0;
        quality.push_back(q);
    }
    std::vector<LabeledExample> val;
    for (std::size_t s = 0; s < 50; ++s) val.push_back(example(data.records[s].sample_id, quality[s], data.latent[s]));

    std::vector<std::vector<double>> keys(data.latent.begin() + 50, data.latent.end());
    std::vector<std::string> ids;
    for (std::size_t s = 50; s < c.n; ++s) ids.push_back(data.records[s].sample_id);
    const auto knn = baseline_labeled_knn(val, keys, ids);

    std::vector<EmbeddingRecord> test(data.records.begin() + 50, data.records.end());
    const auto local = route_all(estimate_local(test, data.spec, build_neighbor_index(RecordSpan(test)), 1));

    double knn_acc = 0.0, local_acc = 0.0;
    for (std::size_t s = 0; s < test.size(); ++s) {
        knn_acc += quality[50 + s][knn[s].chosen];
        local_acc += quality[50 + s][local[s].chosen];
    }
    knn_acc /= static_cast<double>(test.size());
    local_acc /= static_cast<double>(test.size());
    const double random = random_expected_performance(quality);
    CHECK(knn_acc > random);
    CHECK(knn_acc < local_acc);
    CHECK(local_acc >= 0.95);
}
