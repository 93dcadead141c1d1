#include <doctest.h>

#include "../support/corpus.hpp"
#include "../support/oracles.hpp"

#include <routewise/error.hpp>
#include <routewise/metrics.hpp>
#include <routewise/router.hpp>

#include <cmath>
#include <random>

using namespace routewise;

namespace {

RoutingDecision pick(std::size_t chosen) {
    RoutingDecision d;
    d.chosen = chosen;
    return d;
}

}  // namespace

TEST_CASE("containment examples") {
    const std::vector<std::string> paris{"paris"}, capital{"Paris"};
    CHECK(accuracy_contains("The capital is Paris.", paris) == 1);
    CHECK(accuracy_contains("unknown", capital) == 0);
    const std::vector<std::string> empty{""};
    CHECK(accuracy_contains("anything", empty) == 0);
    const std::vector<std::string> spaced{"New   York"};
    CHECK(accuracy_contains("I love new\nyork city", spaced) == 1);
}

TEST_CASE("containment matches an independent oracle on 100 pairs") {
    const auto pairs = corpus::containment_corpus();
    REQUIRE(pairs.size() == 100);
    std::size_t hits = 0;
    for (const auto& [generation, answers] : pairs) {
        const int expected = oracle::contains_answer(generation, answers) ? 1 : 0;
        CHECK_MESSAGE(accuracy_contains(generation, answers) == expected, generation);
        hits += expected;
    }
    // The corpus exercises both outcomes.
    CHECK(hits > 20);
    CHECK(hits < 90);
}

TEST_CASE("containment is monotone under appending") {
    const auto pairs = corpus::containment_corpus();
    for (const auto& [generation, answers] : pairs) {
        if (!accuracy_contains(generation, answers)) continue;
        for (const std::string tail : {"", " more", "s", "\n\nand so on", "X"})
            CHECK(accuracy_contains(generation + tail, answers) == 1);
    }
}

TEST_CASE("Rouge-2 examples") {
    CHECK(rouge2_f1("the cat sat on the mat", "the cat lay on the mat") == doctest::Approx(0.6));
    CHECK(rouge2_f1("a quick brown fox", "a quick brown fox") == 1.0);
    CHECK(rouge2_f1("alpha beta gamma", "delta epsilon zeta") == 0.0);
    CHECK(rouge2_f1("single", "single") == 0.0);
    CHECK(rouge2_f1("The Cat, sat!", "the cat sat") == 1.0);
    // Unicode whitespace separates tokens.
    CHECK(rouge2_f1("the cat　sat", "the cat sat") == 1.0);
}

TEST_CASE("Rouge-2 clips repeated bigrams") {
    // Candidate bigrams: (a,a) x3; reference has one (a,a).
    CHECK(rouge2_f1("a a a a", "a a b") == doctest::Approx(2.0 * (1.0 / 3.0) * 0.5 / (1.0 / 3.0 + 0.5)));
}

TEST_CASE("Rouge-2 stays within bounds and self-matches") {
    std::mt19937_64 gen(5);
    const std::vector<std::string> vocab{"a", "b", "c", "d", "e,", "F", "g!"};
    for (int trial = 0; trial < 1000; ++trial) {
        auto sentence = [&] {
            std::string s;
            for (std::size_t i = 0, n = gen() % 8; i < n; ++i) s += vocab[gen() % vocab.size()] + " ";
            return s;
        };
        const auto x = sentence(), y = sentence();
        const double f = rouge2_f1(x, y);
        REQUIRE(f >= 0.0);
        REQUIRE(f <= 1.0);
        REQUIRE(f == rouge2_f1(y, x));
        if (rouge_tokens(x).size() >= 2) REQUIRE(rouge2_f1(x, x) == 1.0);
    }
}

TEST_CASE("Spearman examples") {
    const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4}, rev{4, 3, 2, 1};
    CHECK(spearman_rho(a, a) == doctest::Approx(1.0));
    CHECK(spearman_rho(a, rev) == doctest::Approx(-1.0));
    CHECK(spearman_rho(a, b) == doctest::Approx(0.8));
    const std::vector<double> flat{2, 2, 2, 2}, shorter{1, 2};
    CHECK_THROWS_AS(spearman_rho(a, flat), Error);
    CHECK_THROWS_AS(spearman_rho(a, shorter), Error);
    try {
        spearman_rho(flat, a);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::undefined_value);
    }
}

TEST_CASE("average ranks share ties") {
    const std::vector<double> v{10, 20, 20, 5};
    CHECK(average_ranks(v) == std::vector<double>{2.0, 3.5, 3.5, 1.0});
}

TEST_CASE("Spearman is invariant under increasing transforms") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> a(3 + trial % 10), b(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = u(gen);
            b[i] = trial % 3 == 0 ? std::round(u(gen)) : u(gen);
        }
        double rho = 0.0;
        try {
            rho = spearman_rho(a, b);
        } catch (const Error&) {
            continue;
        }
        std::vector<double> ta, tb;
        for (double x : a) ta.push_back(std::exp(x));
        for (double x : b) tb.push_back(std::sqrt(x) - 7.0);
        REQUIRE(spearman_rho(ta, tb) == doctest::Approx(rho).epsilon(1e-12));
    }
}

TEST_CASE("rank histogram examples") {
    const std::vector<std::vector<double>> tied_top{{0.9, 0.9, 0.1}};
    const std::vector<RoutingDecision> one{pick(1)};
    CHECK(rank_histogram(tied_top, one) == std::vector<std::size_t>{1, 0, 0});

    const std::vector<std::vector<double>> pattern{{3, 2, 2, 1}};
    CHECK(competition_rank(pattern[0], 0) == 1);
    CHECK(competition_rank(pattern[0], 1) == 2);
    CHECK(competition_rank(pattern[0], 2) == 2);
    CHECK(competition_rank(pattern[0], 3) == 4);
    const std::vector<RoutingDecision> last{pick(3)};
    CHECK(rank_histogram(pattern, last) == std::vector<std::size_t>{0, 0, 0, 1});
}

TEST_CASE("rank histogram properties") {
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> u;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + trial % 20, m = 2 + trial % 5;
        std::vector<std::vector<double>> q(n, std::vector<double>(m));
        std::vector<RoutingDecision> decisions, oracle_routed;
        for (auto& row : q) {
            for (double& x : row) x = std::round(u(gen) * 4.0) / 4.0;
            decisions.push_back(pick(gen() % m));
            oracle_routed.push_back(pick(oracle::argmax(row)));
        }
        const auto h = rank_histogram(q, decisions);
        std::size_t total = 0;
        for (auto c : h) total += c;
        REQUIRE(total == n);
        auto transformed = q;
        for (auto& row : transformed)
            for (double& x : row) x = std::exp(3.0 * x);
        REQUIRE(rank_histogram(transformed, decisions) == h);
        REQUIRE(rank_histogram(q, oracle_routed)[0] == n);
    }
}
