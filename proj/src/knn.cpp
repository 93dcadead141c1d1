#include "routewise/knn.hpp"

#include "routewise/error.hpp"

#include <algorithm>
#include <cmath>

namespace routewise {

const char* to_string(DistanceMetric metric) noexcept {
    return metric == DistanceMetric::cosine ? "cosine" : "euclidean";
}

DistanceMetric parse_distance_metric(const std::string& text) {
    if (text == "euclidean") return DistanceMetric::euclidean;
    if (text == "cosine") return DistanceMetric::cosine;
    fail(ErrorCode::invalid_argument, "unknown distance metric '" + text + "'");
}

double distance(DistanceMetric metric, std::span<const double> a, std::span<const double> b) {
    if (metric == DistanceMetric::euclidean) {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double diff = a[i] - b[i];
            sum += diff * diff;
        }
        return sum;
    }
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        norm_a += a[i] * a[i];
        norm_b += b[i] * b[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) return 1.0;
    // One square root of the product keeps parallel integer vectors at exactly 0.
    return 1.0 - dot / std::sqrt(norm_a * norm_b);
}

NeighborIndex NeighborIndex::build(std::vector<std::vector<double>> keys, std::vector<std::string> ids,
                                   DistanceMetric metric) {
    if (keys.size() != ids.size())
        fail(ErrorCode::invalid_argument, "key count does not match id count");
    if (keys.empty()) fail(ErrorCode::empty_context, "cannot build an index over zero keys");

    NeighborIndex index;
    index.metric_ = metric;
    index.dim_ = keys.front().size();
    if (index.dim_ == 0) fail(ErrorCode::invalid_argument, "index keys must have dimension >= 1");
    index.keys_.reserve(keys.size() * index.dim_);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i].size() != index.dim_)
            fail(ErrorCode::inconsistent_embeddings,
                 "key for '" + ids[i] + "' has dimension " + std::to_string(keys[i].size()) +
                     ", expected " + std::to_string(index.dim_));
        for (double v : keys[i])
            if (!std::isfinite(v))
                fail(ErrorCode::inconsistent_embeddings, "non-finite key coordinate for '" + ids[i] + "'");
        index.keys_.insert(index.keys_.end(), keys[i].begin(), keys[i].end());
        if (!index.positions_.emplace(ids[i], i).second)
            fail(ErrorCode::duplicate_id, "duplicate id '" + ids[i] + "' in neighbor index");
    }
    index.ids_ = std::move(ids);
    return index;
}

std::optional<std::size_t> NeighborIndex::position_of(std::string_view id) const {
    const auto it = positions_.find(std::string(id));
    if (it == positions_.end()) return std::nullopt;
    return it->second;
}

std::vector<Neighbor> NeighborIndex::query(std::span<const double> key, std::size_t k,
                                           std::optional<std::string_view> exclude_id) const {
    if (key.size() != dim_)
        fail(ErrorCode::inconsistent_embeddings, "query key has dimension " + std::to_string(key.size()) +
                                                     ", index expects " + std::to_string(dim_));
    std::optional<std::size_t> excluded;
    if (exclude_id) excluded = position_of(*exclude_id);
    const std::size_t available = size() - (excluded ? 1 : 0);
    if (k > available)
        fail(ErrorCode::neighborhood_too_large, "neighborhood too large: requested " + std::to_string(k) +
                                                    " neighbors but only " + std::to_string(available) +
                                                    " are available");

    std::vector<Neighbor> candidates;
    candidates.reserve(available);
    for (std::size_t p = 0; p < size(); ++p) {
        if (excluded && *excluded == p) continue;
        candidates.push_back({p, distance(metric_, key, this->key(p))});
    }
    const auto closer = [this](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return ids_[a.position] < ids_[b.position];
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end(), closer);
    candidates.resize(k);
    return candidates;
}

std::vector<std::string> NeighborIndex::query_ids(std::span<const double> key, std::size_t k,
                                                  std::optional<std::string_view> exclude_id) const {
    std::vector<std::string> out;
    for (const auto& n : query(key, k, exclude_id)) out.push_back(ids_[n.position]);
    return out;
}

}  // namespace routewise
