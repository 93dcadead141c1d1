#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace routewise {

enum class DistanceMetric { euclidean, cosine };

const char* to_string(DistanceMetric metric) noexcept;
DistanceMetric parse_distance_metric(const std::string& text);

// Squared Euclidean distance, or 1 - cosine similarity. A zero vector has
// cosine similarity 0 with everything.
double distance(DistanceMetric metric, std::span<const double> a, std::span<const double> b);

struct Neighbor {
    std::size_t position;  // row in the index
    double distance;
};

/// Exact nearest-neighbor search by exhaustive scan. Immutable after
/// construction, so concurrent queries are safe.
class NeighborIndex {
public:
    static NeighborIndex build(std::vector<std::vector<double>> keys, std::vector<std::string> ids,
                               DistanceMetric metric);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t key_dim() const noexcept { return dim_; }
    DistanceMetric metric() const noexcept { return metric_; }

    const std::string& id(std::size_t position) const { return ids_.at(position); }
    std::span<const double> key(std::size_t position) const {
        return {keys_.data() + position * dim_, dim_};
    }
    std::optional<std::size_t> position_of(std::string_view id) const;

    /// The k nearest keys, nearest first. Equal distances are ordered by
    /// lexicographic id. `exclude_id`, when present in the index, is skipped
    /// and reduces the number of available keys by one.
    std::vector<Neighbor> query(std::span<const double> key, std::size_t k,
                                std::optional<std::string_view> exclude_id = std::nullopt) const;

    std::vector<std::string> query_ids(std::span<const double> key, std::size_t k,
                                       std::optional<std::string_view> exclude_id = std::nullopt) const;

private:
    std::size_t dim_ = 0;
    DistanceMetric metric_ = DistanceMetric::euclidean;
    std::vector<double> keys_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> positions_;
};

}  // namespace routewise
