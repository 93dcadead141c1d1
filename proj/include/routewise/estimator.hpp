#pragma once

// Label-free quality scores for an ensemble of generators.
//
// Each generator's output embedding is modeled as the latent "true output"
// embedding plus independent isotropic Gaussian noise with per-coordinate
// variance 1 / (2 * theta_i). Under that model the observable mean squared
// distance between two generators is
//
//     delta_ij = d / (2 theta_i) + d / (2 theta_j),
//
// so any three generators i, j, k give a closed-form solve
//
//     theta_i = d / (delta_ij + delta_ik - delta_jk),
//
// and the final score for i averages that solve over every pair {j, k} that
// excludes i. The estimators below differ only in which samples the deltas
// are averaged over.

#include "routewise/knn.hpp"
#include "routewise/types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace routewise {

/// Denominator floor is this factor times d.
inline constexpr double kDenominatorFloorPerDim = 1e-8;

inline double denominator_floor(std::size_t d) {
    return kDenominatorFloorPerDim * static_cast<double>(d);
}

/// Read access to a batch of samples. Estimators go through this interface so
/// tests can observe exactly which parts of a sample were touched.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual std::size_t size() const = 0;
    virtual std::size_t generators() const = 0;
    virtual std::size_t dim() const = 0;
    virtual const std::string& id(std::size_t sample) const = 0;
    virtual bool has_input_key(std::size_t sample) const = 0;
    virtual std::span<const double> input_key(std::size_t sample) const = 0;
    virtual std::span<const double> embedding(std::size_t sample, std::size_t generator) const = 0;
};

/// SampleSource over a contiguous set of records.
class RecordSpan final : public SampleSource {
public:
    explicit RecordSpan(std::span<const EmbeddingRecord> records) : records_(records) {}

    std::size_t size() const override { return records_.size(); }
    std::size_t generators() const override;
    std::size_t dim() const override;
    const std::string& id(std::size_t sample) const override { return records_[sample].sample_id; }
    bool has_input_key(std::size_t sample) const override {
        return records_[sample].input_key.has_value();
    }
    std::span<const double> input_key(std::size_t sample) const override;
    std::span<const double> embedding(std::size_t sample, std::size_t generator) const override;

private:
    std::span<const EmbeddingRecord> records_;
};

/// Upper-triangle squared distances between generator embeddings of one
/// sample, ordered (0,1), (0,2), ..., (m-2,m-1).
std::vector<double> sample_pair_distances(const SampleSource& samples, std::size_t sample);

/// Mean squared distance between every pair of generators over `records`.
DeltaMatrix pairwise_deltas(std::span<const EmbeddingRecord> records);
DeltaMatrix pairwise_deltas(const SampleSource& samples);

struct TripletTheta {
    double value = 0.0;
    bool clamped = false;
};

/// d / (delta_ij + delta_ik - delta_jk) with the denominator floored at
/// denominator_floor(d).
TripletTheta triplet_theta(const DeltaMatrix& delta, std::size_t i, std::size_t j, std::size_t k,
                           std::size_t d);

struct ScoreVector {
    std::vector<double> scores;
    std::size_t clamped_triplets = 0;
};

/// Averages triplet_theta over all C(m-1, 2) pairs for each generator.
/// Clamped triplets stay in the average.
ScoreVector estimate_theta(const DeltaMatrix& delta, const EnsembleSpec& spec);

/// Deltas over the whole dataset (each sample included in its own context).
/// The returned estimate has an empty sample_id.
ThetaEstimate estimate_global(std::span<const EmbeddingRecord> records, const EnsembleSpec& spec);

/// Same scores as estimate_global, copied onto every sample id.
std::vector<ThetaEstimate> estimate_global_per_sample(std::span<const EmbeddingRecord> records,
                                                      const EnsembleSpec& spec);

/// Keys used to find a sample's neighbors: its input key when every sample
/// carries one, otherwise the centroid of its generator embeddings.
std::vector<std::vector<double>> neighbor_keys(const SampleSource& samples);

NeighborIndex build_neighbor_index(const SampleSource& samples,
                                   DistanceMetric metric = DistanceMetric::euclidean);

/// Sample-conditional estimate: deltas for x are averaged over the n0 nearest
/// neighbors of x, excluding x. `neighbors` must be built over the same
/// samples in the same order. Requires 1 <= n0 < n.
std::vector<ThetaEstimate> estimate_local(const SampleSource& samples, const EnsembleSpec& spec,
                                          const NeighborIndex& neighbors, std::size_t n0);
std::vector<ThetaEstimate> estimate_local(std::span<const EmbeddingRecord> records,
                                          const EnsembleSpec& spec, const NeighborIndex& neighbors,
                                          std::size_t n0);

/// Scores for test samples learned from a held-out pool: the n0 pool samples
/// nearest to the test sample's input key supply the delta context. Only the
/// test samples' ids and input keys are read.
std::vector<ThetaEstimate> estimate_train(const SampleSource& test, const SampleSource& pool,
                                          const EnsembleSpec& spec, std::size_t n0,
                                          DistanceMetric metric = DistanceMetric::euclidean);
std::vector<ThetaEstimate> estimate_train(std::span<const EmbeddingRecord> test,
                                          std::span<const EmbeddingRecord> pool,
                                          const EnsembleSpec& spec, std::size_t n0,
                                          DistanceMetric metric = DistanceMetric::euclidean);

}  // namespace routewise
