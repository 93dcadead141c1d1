#include "routewise/types.hpp"

#include "routewise/error.hpp"

#include <cmath>
#include <unordered_set>

namespace routewise {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::empty_context: return "empty context";
        case ErrorCode::inconsistent_embeddings: return "inconsistent embeddings";
        case ErrorCode::ensemble_too_small: return "ensemble too small";
        case ErrorCode::degenerate_triplet: return "degenerate triplet";
        case ErrorCode::neighborhood_too_large: return "neighborhood too large";
        case ErrorCode::empty_pool: return "empty train pool";
        case ErrorCode::duplicate_id: return "duplicate id";
        case ErrorCode::parse_error: return "parse error";
        case ErrorCode::io_error: return "i/o error";
        case ErrorCode::undefined_value: return "undefined value";
    }
    return "unknown error";
}

void EnsembleSpec::validate() const {
    if (generator_names.size() < 3)
        fail(ErrorCode::ensemble_too_small,
             "ensemble too small: need at least 3 generators, got " +
                 std::to_string(generator_names.size()));
    if (embedding_dim == 0) fail(ErrorCode::invalid_argument, "embedding dimension must be >= 1");
    std::unordered_set<std::string> seen;
    for (const auto& name : generator_names)
        if (!seen.insert(name).second)
            fail(ErrorCode::duplicate_id, "duplicate generator name '" + name + "'");
}

EnsembleSpec EnsembleSpec::with_default_names(std::size_t m, std::size_t d) {
    EnsembleSpec spec;
    spec.embedding_dim = d;
    for (std::size_t i = 0; i < m; ++i) spec.generator_names.push_back("gen_" + std::to_string(i));
    return spec;
}

void validate_record(const EmbeddingRecord& record, const EnsembleSpec& spec) {
    const std::size_t m = spec.generators();
    const std::size_t d = spec.embedding_dim;
    if (record.dim != d || record.values.size() != m * d)
        fail(ErrorCode::inconsistent_embeddings,
             "inconsistent embeddings in sample '" + record.sample_id + "': expected " +
                 std::to_string(m) + " vectors of dimension " + std::to_string(d));
    for (double v : record.values)
        if (!std::isfinite(v))
            fail(ErrorCode::inconsistent_embeddings,
                 "non-finite embedding coordinate in sample '" + record.sample_id + "'");
    if (record.input_key)
        for (double v : *record.input_key)
            if (!std::isfinite(v))
                fail(ErrorCode::inconsistent_embeddings,
                     "non-finite input key coordinate in sample '" + record.sample_id + "'");
}

void validate_records(std::span<const EmbeddingRecord> records, const EnsembleSpec& spec) {
    spec.validate();
    std::unordered_set<std::string> ids;
    for (const auto& record : records) {
        validate_record(record, spec);
        if (!ids.insert(record.sample_id).second)
            fail(ErrorCode::duplicate_id, "duplicate sample id '" + record.sample_id + "'");
    }
}

DeltaMatrix::DeltaMatrix(std::size_t m, std::size_t context_size)
    : m_(m), context_size_(context_size), values_(m * m, 0.0) {}

void DeltaMatrix::set(std::size_t i, std::size_t j, double value) {
    values_[i * m_ + j] = value;
    values_[j * m_ + i] = value;
}

void DeltaMatrix::validate() const {
    if (context_size_ == 0) fail(ErrorCode::empty_context, "empty context");
    for (std::size_t i = 0; i < m_; ++i) {
        if ((*this)(i, i) != 0.0)
            fail(ErrorCode::invalid_argument, "delta matrix diagonal must be zero");
        for (std::size_t j = 0; j < m_; ++j) {
            const double v = (*this)(i, j);
            if (!std::isfinite(v) || v < 0.0)
                fail(ErrorCode::invalid_argument, "delta entries must be finite and nonnegative");
            if (v != (*this)(j, i)) fail(ErrorCode::invalid_argument, "delta matrix must be symmetric");
        }
    }
}

const char* to_string(EstimateMode mode) noexcept {
    switch (mode) {
        case EstimateMode::global: return "global";
        case EstimateMode::local: return "local";
        case EstimateMode::train: return "train";
    }
    return "?";
}

EstimateMode parse_estimate_mode(const std::string& text) {
    if (text == "global") return EstimateMode::global;
    if (text == "local") return EstimateMode::local;
    if (text == "train") return EstimateMode::train;
    fail(ErrorCode::invalid_argument, "unknown estimation mode '" + text + "'");
}

}  // namespace routewise
