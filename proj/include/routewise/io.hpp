#pragma once

#include "routewise/metrics.hpp"
#include "routewise/router.hpp"
#include "routewise/simulate.hpp"
#include "routewise/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace routewise {

using Json = nlohmann::ordered_json;

enum class TaskMetric { contains, rouge2 };

const char* to_string(TaskMetric metric) noexcept;
TaskMetric parse_task_metric(const std::string& text);

/// Paths are stored as given; relative ones resolve against the manifest's
/// directory when loaded through load_manifest.
struct DatasetManifest {
    std::vector<std::string> generator_names;  // empty: take from embeddings
    std::optional<std::size_t> embedding_dim;
    std::filesystem::path embeddings_path;
    std::optional<std::filesystem::path> generations_path;
    std::optional<std::filesystem::path> labels_path;
    std::optional<std::filesystem::path> input_keys_path;
    TaskMetric task_metric = TaskMetric::contains;

    Json to_json() const;
    static DatasetManifest from_json(const Json& j);
};

struct EmbeddingSet {
    EnsembleSpec spec;
    std::vector<EmbeddingRecord> records;
};

struct GenerationEntry {
    std::string sample_id;
    std::optional<std::string> input;
    std::vector<std::string> texts;  // in generator order
};

struct LabelEntry {
    std::string sample_id;
    std::vector<std::string> references;
    std::optional<std::vector<double>> quality;  // in generator order
    std::optional<std::vector<double>> key;
};

struct Dataset {
    DatasetManifest manifest;
    EnsembleSpec spec;
    std::vector<EmbeddingRecord> records;
    std::optional<std::vector<GenerationEntry>> generations;
    std::optional<std::vector<LabelEntry>> labels;
};

inline constexpr char kBinaryMagic[4] = {'S', 'M', 'B', '1'};

// Embedding files. The reader sniffs the SMB1 magic and otherwise parses
// JSON Lines; lines carrying only a "provenance" object are skipped.
EmbeddingSet read_embeddings(const std::filesystem::path& path);
EmbeddingSet read_embeddings_jsonl(std::istream& in, const std::string& source_name = "<stream>");
EmbeddingSet read_embeddings_binary(std::istream& in, const std::string& source_name = "<stream>");
void write_embeddings_jsonl(const std::filesystem::path& path, const EmbeddingSet& set,
                            const std::optional<Json>& provenance = std::nullopt);
void write_embeddings_binary(const std::filesystem::path& path, const EmbeddingSet& set);

/// Attaches `input_key` vectors from a JSONL file of {"id", "input_key"}.
void attach_input_keys(const std::filesystem::path& path, std::vector<EmbeddingRecord>& records);

std::vector<GenerationEntry> read_generations(const std::filesystem::path& path, const EnsembleSpec& spec);
std::vector<LabelEntry> read_labels(const std::filesystem::path& path, const EnsembleSpec& spec);

DatasetManifest read_manifest_file(const std::filesystem::path& path);
void write_manifest_file(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Loads and cross-validates every file the manifest references. Ids must
/// appear in the same order in every file.
Dataset load_manifest(const std::filesystem::path& path);
Dataset load_embeddings_only(const std::filesystem::path& path);

/// Writes via a temporary file in the same directory and renames it over
/// `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

void write_estimates(const std::filesystem::path& path, std::span<const ThetaEstimate> estimates,
                     const EnsembleSpec& spec, const Json& provenance);

struct EstimatesFile {
    Json provenance;
    std::vector<std::string> generator_names;
    std::vector<ThetaEstimate> estimates;
};
EstimatesFile read_estimates(const std::filesystem::path& path);

void write_decisions(const std::filesystem::path& path, std::span<const RoutingDecision> decisions,
                     const EnsembleSpec& spec, const std::vector<GenerationEntry>* generations,
                     const Json& provenance);

struct DecisionsFile {
    Json provenance;
    std::vector<std::string> generator_names;
    std::vector<RoutingDecision> decisions;
};
DecisionsFile read_decisions(const std::filesystem::path& path);

void write_truth(const std::filesystem::path& path, const SyntheticDataset& dataset, const Json& provenance);

struct TruthFile {
    std::vector<std::string> generator_names;
    std::vector<std::string> sample_ids;
    std::vector<std::vector<double>> theta;
    std::vector<std::size_t> regions;
    std::uint64_t seed = 0;
};
TruthFile read_truth(const std::filesystem::path& path);

Json report_to_json(const EvalReport& report, const Json& provenance);
/// Two columns, metric and value, one row per metric.
std::string report_to_csv(const EvalReport& report);

}  // namespace routewise
