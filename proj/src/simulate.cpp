#include "routewise/simulate.hpp"

#include "routewise/error.hpp"
#include "routewise/knn.hpp"
#include "routewise/rng.hpp"
#include "routewise/router.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace routewise {

const char* to_string(RegionRule rule) noexcept {
    return rule == RegionRule::contiguous ? "contiguous" : "round_robin";
}

RegionRule parse_region_rule(const std::string& text) {
    if (text == "round_robin") return RegionRule::round_robin;
    if (text == "contiguous") return RegionRule::contiguous;
    fail(ErrorCode::invalid_argument, "unknown region rule '" + text + "'");
}

void SyntheticConfig::validate() const {
    if (n == 0) fail(ErrorCode::invalid_argument, "synthetic config needs n >= 1");
    // Two generators suffice to check pair moments; estimation needs three.
    if (m < 2) fail(ErrorCode::ensemble_too_small, "ensemble too small: synthetic config needs m >= 2");
    if (d == 0) fail(ErrorCode::invalid_argument, "synthetic config needs d >= 1");
    if (regions == 0) fail(ErrorCode::invalid_argument, "region count must be >= 1");
    if (region_theta.empty()) fail(ErrorCode::invalid_argument, "no theta profile given");
    for (const auto& profile : region_theta) {
        if (profile.size() != m)
            fail(ErrorCode::invalid_argument, "theta profile has " + std::to_string(profile.size()) +
                                                  " entries, expected m = " + std::to_string(m));
        for (double t : profile)
            if (!std::isfinite(t) || t <= 0.0)
                fail(ErrorCode::invalid_argument, "invalid theta: every value must be positive and finite");
    }
    if (!std::isfinite(region_spread) || region_spread < 0.0)
        fail(ErrorCode::invalid_argument, "region spread must be finite and nonnegative");
    if (!std::isfinite(centroid_distance) || centroid_distance < 0.0)
        fail(ErrorCode::invalid_argument, "centroid distance must be finite and nonnegative");
}

std::vector<std::size_t> SyntheticDataset::best_generators() const {
    std::vector<std::size_t> out;
    out.reserve(theta_truth.size());
    for (const auto& t : theta_truth) out.push_back(argmax_lowest(t));
    return out;
}

SyntheticDataset sample_dataset(const SyntheticConfig& config) {
    config.validate();
    const std::size_t n = config.n, m = config.m, d = config.d, regions = config.regions;

    SyntheticDataset out;
    out.config = config;
    out.spec = EnsembleSpec::with_default_names(m, d);

    Rng rng(config.seed);

    std::vector<std::vector<double>> centroids;
    if (regions > 1) {
        centroids.assign(regions, std::vector<double>(d, 0.0));
        if (regions <= d) {
            const double scale = config.centroid_distance / std::sqrt(2.0);
            for (std::size_t r = 0; r < regions; ++r) centroids[r][r] = scale;
        } else {
            const double scale = config.centroid_distance / std::sqrt(2.0 * static_cast<double>(d));
            for (auto& c : centroids)
                for (double& x : c) x = scale * rng.normal();
        }
    }

    out.records.resize(n);
    out.latent.resize(n);
    out.theta_truth.resize(n);
    out.region_labels.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t region =
            config.rule == RegionRule::round_robin ? s % regions : (s * regions) / n;
        const auto& theta = config.region_theta[region % config.region_theta.size()];

        auto& z = out.latent[s];
        z.resize(d);
        for (std::size_t c = 0; c < d; ++c) {
            if (regions > 1)
                z[c] = centroids[region][c] + config.region_spread * rng.normal();
            else
                z[c] = rng.normal();
        }

        auto& record = out.records[s];
        record.sample_id = "s" + std::to_string(s);
        record.dim = d;
        record.values.resize(m * d);
        for (std::size_t g = 0; g < m; ++g) {
            const double sigma = std::sqrt(1.0 / (2.0 * theta[g]));
            auto v = record.embedding(g);
            for (std::size_t c = 0; c < d; ++c) v[c] = z[c] + sigma * rng.normal();
        }
        record.input_key = z;
        out.theta_truth[s] = theta;
        out.region_labels[s] = region;
    }
    return out;
}

SyntheticDataset sample_piecewise(const SyntheticConfig& config) {
    if (config.regions < 2) fail(ErrorCode::invalid_argument, "piecewise sampling needs at least 2 regions");
    std::set<std::vector<double>> distinct(config.region_theta.begin(), config.region_theta.end());
    if (distinct.size() < 2)
        fail(ErrorCode::invalid_argument, "piecewise sampling needs at least 2 distinct theta profiles");
    return sample_dataset(config);
}

std::vector<PairMomentReport> verify_pair_moments(const SyntheticDataset& dataset) {
    const std::size_t m = dataset.spec.generators();
    const std::size_t d = dataset.spec.embedding_dim;
    const std::size_t n = dataset.records.size();
    const double dd = static_cast<double>(d);

    std::vector<PairMomentReport> out;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            double dist_sum = 0.0, analytic_sum = 0.0, cross_sum = 0.0, cross_sq = 0.0;
            for (std::size_t s = 0; s < n; ++s) {
                const auto a = dataset.records[s].embedding(i);
                const auto b = dataset.records[s].embedding(j);
                const auto& z = dataset.latent[s];
                double dist = 0.0, cross = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = a[c] - b[c];
                    dist += diff * diff;
                    cross += (a[c] - z[c]) * (b[c] - z[c]);
                }
                dist_sum += dist;
                cross_sum += cross;
                cross_sq += cross * cross;
                const auto& t = dataset.theta_truth[s];
                analytic_sum += dd / (2.0 * t[i]) + dd / (2.0 * t[j]);
            }
            PairMomentReport r;
            r.i = i;
            r.j = j;
            r.empirical = dist_sum / static_cast<double>(n);
            r.analytic = analytic_sum / static_cast<double>(n);
            r.relative_error = std::abs(r.empirical - r.analytic) / r.analytic;
            r.cross_term_mean = cross_sum / static_cast<double>(n);
            if (n > 1) {
                const double var = (cross_sq - static_cast<double>(n) * r.cross_term_mean * r.cross_term_mean) /
                                   static_cast<double>(n - 1);
                r.cross_term_stderr = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
            }
            out.push_back(r);
        }
    return out;
}

std::vector<NoiseVarianceReport> verify_noise_variance(const SyntheticDataset& dataset) {
    const std::size_t m = dataset.spec.generators();
    const std::size_t d = dataset.spec.embedding_dim;
    const std::size_t n = dataset.records.size();

    std::vector<NoiseVarianceReport> out;
    for (std::size_t g = 0; g < m; ++g) {
        double sum = 0.0, sum_sq = 0.0, analytic = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            const auto v = dataset.records[s].embedding(g);
            for (std::size_t c = 0; c < d; ++c) {
                const double e = v[c] - dataset.latent[s][c];
                sum += e;
                sum_sq += e * e;
            }
            analytic += 1.0 / (2.0 * dataset.theta_truth[s][g]);
        }
        const double draws = static_cast<double>(n * d);
        const double mean = sum / draws;
        NoiseVarianceReport r;
        r.generator = g;
        r.draws = n * d;
        r.empirical = draws > 1 ? (sum_sq - draws * mean * mean) / (draws - 1.0) : 0.0;
        r.analytic = analytic / static_cast<double>(n);
        r.relative_error = std::abs(r.empirical - r.analytic) / r.analytic;
        out.push_back(r);
    }
    return out;
}

double nearest_neighbor_region_recovery(const SyntheticDataset& dataset) {
    const std::size_t n = dataset.records.size();
    if (n < 2) fail(ErrorCode::neighborhood_too_large, "need at least two samples for region recovery");
    std::vector<std::string> ids;
    for (const auto& r : dataset.records) ids.push_back(r.sample_id);
    const auto index = NeighborIndex::build(dataset.latent, std::move(ids), DistanceMetric::euclidean);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < n; ++s) {
        const auto nn = index.query(index.key(s), 1, dataset.records[s].sample_id);
        hits += dataset.region_labels[nn.front().position] == dataset.region_labels[s] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace routewise
