#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace routewise {

/// Names of the m generators in the ensemble and the embedding dimension d
/// shared by every output embedding.
struct EnsembleSpec {
    std::vector<std::string> generator_names;
    std::size_t embedding_dim = 0;

    std::size_t generators() const noexcept { return generator_names.size(); }

    // Throws ensemble_too_small for m < 3, invalid_argument otherwise.
    void validate() const;

    static EnsembleSpec with_default_names(std::size_t m, std::size_t d);
};

/// One sample: the m generator output embeddings, stored row-major (m x d).
/// `input_key` is an optional embedding of the input alone; it is the only
/// per-sample signal train-mode estimation is allowed to look at.
struct EmbeddingRecord {
    std::string sample_id;
    std::size_t dim = 0;
    std::vector<double> values;
    std::optional<std::vector<double>> input_key;

    std::size_t generators() const noexcept { return dim == 0 ? 0 : values.size() / dim; }

    std::span<const double> embedding(std::size_t generator) const {
        return {values.data() + generator * dim, dim};
    }
    std::span<double> embedding(std::size_t generator) {
        return {values.data() + generator * dim, dim};
    }
};

/// Checks a single record against the ensemble: m vectors of dimension d, all
/// coordinates finite.
void validate_record(const EmbeddingRecord& record, const EnsembleSpec& spec);

/// Validates every record plus id uniqueness.
void validate_records(std::span<const EmbeddingRecord> records, const EnsembleSpec& spec);

/// Mean pairwise squared distances between generator embeddings over a context
/// of samples. Stored as a dense symmetric m x m matrix.
class DeltaMatrix {
public:
    DeltaMatrix() = default;
    DeltaMatrix(std::size_t m, std::size_t context_size);

    std::size_t size() const noexcept { return m_; }
    std::size_t context_size() const noexcept { return context_size_; }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * m_ + j]; }

    // Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double value);

    const std::vector<double>& values() const noexcept { return values_; }

    void validate() const;

private:
    std::size_t m_ = 0;
    std::size_t context_size_ = 0;
    std::vector<double> values_;
};

enum class EstimateMode { global, local, train };

const char* to_string(EstimateMode mode) noexcept;
EstimateMode parse_estimate_mode(const std::string& text);

/// Per-sample quality scores, one per generator.
struct ThetaEstimate {
    std::string sample_id;
    std::vector<double> scores;
    EstimateMode mode = EstimateMode::global;
    std::optional<std::size_t> n0;
    // Triplets whose denominator hit the floor while producing `scores`.
    std::size_t clamped_triplets = 0;
};

}  // namespace routewise
