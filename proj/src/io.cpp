#include "routewise/io.hpp"

#include "routewise/error.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>
#include <unordered_map>
#include <unordered_set>

namespace fs = std::filesystem;

namespace routewise {

namespace {

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) fail(ErrorCode::io_error, "cannot open '" + path.string() + "' for reading");
    return in;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
    fail(ErrorCode::parse_error, source + ":" + std::to_string(line) + ": " + what);
}

std::vector<double> parse_vector(const Json& j, const std::string& source, std::size_t line,
                                 const std::string& field) {
    if (!j.is_array()) parse_fail(source, line, "'" + field + "' must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) parse_fail(source, line, "'" + field + "' must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

// Iterates non-blank JSON lines, skipping provenance headers.
template <typename Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            parse_fail(source, line, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) parse_fail(source, line, "expected a JSON object");
        if (j.contains("provenance") && !j.contains("id")) continue;
        if (!j.contains("id") || !j["id"].is_string()) parse_fail(source, line, "missing string field 'id'");
        fn(j, line);
    }
}

void check_same_ids(const std::vector<EmbeddingRecord>& records, const std::vector<std::string>& ids,
                    const std::string& what) {
    if (ids.size() != records.size())
        fail(ErrorCode::inconsistent_embeddings, what + " has " + std::to_string(ids.size()) +
                                                     " samples but embeddings have " +
                                                     std::to_string(records.size()));
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] != records[i].sample_id)
            fail(ErrorCode::inconsistent_embeddings, what + " sample " + std::to_string(i) + " is '" + ids[i] +
                                                         "' but embeddings have '" + records[i].sample_id + "'");
}

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<char>((value >> (8 * b)) & 0xFF));
}

template <typename T>
T get_le(std::istream& in, const std::string& source) {
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
        fail(ErrorCode::parse_error, source + ": truncated binary embedding file");
    T value = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) value |= static_cast<T>(bytes[b]) << (8 * b);
    return value;
}

Json header_line(const Json& provenance, const EnsembleSpec& spec) {
    Json h;
    h["provenance"] = provenance;
    h["generators"] = spec.generator_names;
    return h;
}

std::vector<std::string> generator_names_from_header(const Json& header, const std::string& source) {
    if (!header.contains("generators") || !header["generators"].is_array())
        fail(ErrorCode::parse_error, source + ": header lacks the generator list");
    return header["generators"].get<std::vector<std::string>>();
}

// Returns the header and the remaining per-sample objects.
std::pair<Json, std::vector<Json>> read_headed_jsonl(const fs::path& path) {
    auto in = open_input(path);
    std::string text;
    std::size_t line = 0;
    Json header;
    std::vector<Json> rows;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            parse_fail(path.string(), line, std::string("malformed JSON: ") + e.what());
        }
        if (header.is_null()) {
            if (!j.contains("provenance")) parse_fail(path.string(), line, "missing provenance header");
            header = std::move(j);
            continue;
        }
        rows.push_back(std::move(j));
    }
    if (header.is_null()) fail(ErrorCode::parse_error, path.string() + ": empty file");
    return {std::move(header), std::move(rows)};
}

}  // namespace

const char* to_string(TaskMetric metric) noexcept {
    return metric == TaskMetric::rouge2 ? "rouge2" : "contains";
}

TaskMetric parse_task_metric(const std::string& text) {
    if (text == "contains") return TaskMetric::contains;
    if (text == "rouge2") return TaskMetric::rouge2;
    fail(ErrorCode::invalid_argument, "unknown task metric '" + text + "'");
}

Json DatasetManifest::to_json() const {
    Json j;
    if (!generator_names.empty()) j["generators"] = generator_names;
    if (embedding_dim) j["embedding_dim"] = *embedding_dim;
    j["embeddings"] = embeddings_path.string();
    if (generations_path) j["generations"] = generations_path->string();
    if (labels_path) j["labels"] = labels_path->string();
    if (input_keys_path) j["input_keys"] = input_keys_path->string();
    j["task_metric"] = to_string(task_metric);
    return j;
}

DatasetManifest DatasetManifest::from_json(const Json& j) {
    if (!j.is_object()) fail(ErrorCode::parse_error, "manifest must be a JSON object");
    DatasetManifest m;
    try {
        if (j.contains("generators")) m.generator_names = j["generators"].get<std::vector<std::string>>();
        if (j.contains("embedding_dim")) m.embedding_dim = j["embedding_dim"].get<std::size_t>();
        if (!j.contains("embeddings")) fail(ErrorCode::parse_error, "manifest lacks 'embeddings'");
        m.embeddings_path = j["embeddings"].get<std::string>();
        if (j.contains("generations")) m.generations_path = j["generations"].get<std::string>();
        if (j.contains("labels")) m.labels_path = j["labels"].get<std::string>();
        if (j.contains("input_keys")) m.input_keys_path = j["input_keys"].get<std::string>();
        if (j.contains("task_metric")) m.task_metric = parse_task_metric(j["task_metric"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse_error, std::string("malformed manifest: ") + e.what());
    }
    return m;
}

EmbeddingSet read_embeddings_jsonl(std::istream& in, const std::string& source) {
    EmbeddingSet set;
    std::unordered_set<std::string> ids;
    for_each_json_line(in, source, [&](const Json& j, std::size_t line) {
        if (!j.contains("embeddings") || !j["embeddings"].is_object())
            parse_fail(source, line, "missing object field 'embeddings'");
        const auto& emb = j["embeddings"];
        EmbeddingRecord record;
        record.sample_id = j["id"].get<std::string>();

        if (set.records.empty()) {
            for (const auto& [name, _] : emb.items()) set.spec.generator_names.push_back(name);
            if (set.spec.generator_names.size() < 3)
                fail(ErrorCode::ensemble_too_small,
                     source + ":" + std::to_string(line) + ": ensemble too small: sample '" + record.sample_id +
                         "' has " + std::to_string(set.spec.generator_names.size()) +
                         " generators, at least 3 are required");
        }
        if (emb.size() != set.spec.generators())
            fail(ErrorCode::inconsistent_embeddings, "inconsistent embeddings: sample '" + record.sample_id +
                                                         "' has " + std::to_string(emb.size()) + " generators, expected " +
                                                         std::to_string(set.spec.generators()));
        for (const auto& name : set.spec.generator_names) {
            if (!emb.contains(name))
                fail(ErrorCode::inconsistent_embeddings,
                     "inconsistent embeddings: sample '" + record.sample_id + "' lacks generator '" + name + "'");
            const auto v = parse_vector(emb[name], source, line, "embeddings." + name);
            if (set.records.empty() && record.values.empty()) set.spec.embedding_dim = v.size();
            if (v.size() != set.spec.embedding_dim || v.empty())
                fail(ErrorCode::inconsistent_embeddings,
                     "inconsistent embeddings: sample '" + record.sample_id + "' generator '" + name +
                         "' has dimension " + std::to_string(v.size()) + ", expected " +
                         std::to_string(set.spec.embedding_dim));
            record.values.insert(record.values.end(), v.begin(), v.end());
        }
        record.dim = set.spec.embedding_dim;
        if (j.contains("input_key") && !j["input_key"].is_null())
            record.input_key = parse_vector(j["input_key"], source, line, "input_key");
        if (!ids.insert(record.sample_id).second)
            fail(ErrorCode::duplicate_id, "duplicate sample id '" + record.sample_id + "' at " + source + ":" +
                                              std::to_string(line));
        validate_record(record, set.spec);
        set.records.push_back(std::move(record));
    });
    if (set.records.empty()) fail(ErrorCode::empty_context, source + ": no embedding records");

    std::optional<std::size_t> key_dim;
    for (const auto& r : set.records) {
        if (!r.input_key) continue;
        if (!key_dim) key_dim = r.input_key->size();
        if (r.input_key->size() != *key_dim || *key_dim == 0)
            fail(ErrorCode::inconsistent_embeddings,
                 "inconsistent input key dimension in sample '" + r.sample_id + "'");
    }
    set.spec.validate();
    return set;
}

EmbeddingSet read_embeddings_binary(std::istream& in, const std::string& source) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kBinaryMagic, 4) != 0)
        fail(ErrorCode::parse_error, source + ": not an SMB1 file");
    const auto m = get_le<std::uint32_t>(in, source);
    const auto d = get_le<std::uint32_t>(in, source);
    const auto n = get_le<std::uint64_t>(in, source);
    if (m < 3) fail(ErrorCode::ensemble_too_small, source + ": ensemble too small (m = " + std::to_string(m) + ")");
    if (d == 0) fail(ErrorCode::parse_error, source + ": zero embedding dimension");

    EmbeddingSet set;
    set.spec = EnsembleSpec::with_default_names(m, d);
    std::unordered_set<std::string> ids;
    for (std::uint64_t s = 0; s < n; ++s) {
        const auto id_len = get_le<std::uint32_t>(in, source);
        EmbeddingRecord record;
        record.sample_id.resize(id_len);
        if (id_len > 0 && !in.read(record.sample_id.data(), id_len))
            fail(ErrorCode::parse_error, source + ": truncated sample id in block " + std::to_string(s));
        record.dim = d;
        record.values.resize(static_cast<std::size_t>(m) * d);
        for (double& v : record.values) {
            const auto bits = get_le<std::uint32_t>(in, source);
            float f;
            std::memcpy(&f, &bits, sizeof f);
            v = static_cast<double>(f);
        }
        if (!ids.insert(record.sample_id).second)
            fail(ErrorCode::duplicate_id, "duplicate sample id '" + record.sample_id + "' in " + source);
        validate_record(record, set.spec);
        set.records.push_back(std::move(record));
    }
    if (in.peek() != std::char_traits<char>::eof())
        fail(ErrorCode::parse_error, source + ": trailing bytes after " + std::to_string(n) + " records");
    if (set.records.empty()) fail(ErrorCode::empty_context, source + ": no embedding records");
    return set;
}

EmbeddingSet read_embeddings(const fs::path& path) {
    auto in = open_input(path, std::ios::in | std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    const bool binary = in.gcount() == 4 && std::memcmp(magic, kBinaryMagic, 4) == 0;
    in.clear();
    in.seekg(0);
    return binary ? read_embeddings_binary(in, path.string()) : read_embeddings_jsonl(in, path.string());
}

void write_embeddings_jsonl(const fs::path& path, const EmbeddingSet& set, const std::optional<Json>& provenance) {
    validate_records(set.records, set.spec);
    std::string out;
    if (provenance) out += Json{{"provenance", *provenance}}.dump() + "\n";
    for (const auto& r : set.records) {
        Json j;
        j["id"] = r.sample_id;
        Json emb = Json::object();
        for (std::size_t g = 0; g < set.spec.generators(); ++g) {
            const auto v = r.embedding(g);
            emb[set.spec.generator_names[g]] = std::vector<double>(v.begin(), v.end());
        }
        j["embeddings"] = std::move(emb);
        if (r.input_key) j["input_key"] = *r.input_key;
        out += j.dump() + "\n";
    }
    write_file_atomic(path, out);
}

void write_embeddings_binary(const fs::path& path, const EmbeddingSet& set) {
    validate_records(set.records, set.spec);
    std::string out(kBinaryMagic, 4);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.spec.generators()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.spec.embedding_dim));
    put_le<std::uint64_t>(out, set.records.size());
    for (const auto& r : set.records) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.sample_id.size()));
        out += r.sample_id;
        for (double v : r.values) {
            const float f = static_cast<float>(v);
            std::uint32_t bits;
            std::memcpy(&bits, &f, sizeof bits);
            put_le<std::uint32_t>(out, bits);
        }
    }
    write_file_atomic(path, out);
}

void attach_input_keys(const fs::path& path, std::vector<EmbeddingRecord>& records) {
    auto in = open_input(path);
    std::vector<std::string> ids;
    std::vector<std::vector<double>> keys;
    for_each_json_line(in, path.string(), [&](const Json& j, std::size_t line) {
        if (!j.contains("input_key")) parse_fail(path.string(), line, "missing field 'input_key'");
        ids.push_back(j["id"].get<std::string>());
        keys.push_back(parse_vector(j["input_key"], path.string(), line, "input_key"));
        if (keys.back().empty() || keys.back().size() != keys.front().size())
            fail(ErrorCode::inconsistent_embeddings,
                 "inconsistent input key dimension in sample '" + ids.back() + "'");
    });
    check_same_ids(records, ids, "input key file");
    for (std::size_t i = 0; i < records.size(); ++i) records[i].input_key = std::move(keys[i]);
}

std::vector<GenerationEntry> read_generations(const fs::path& path, const EnsembleSpec& spec) {
    auto in = open_input(path);
    std::vector<GenerationEntry> out;
    for_each_json_line(in, path.string(), [&](const Json& j, std::size_t line) {
        if (!j.contains("generations") || !j["generations"].is_object())
            parse_fail(path.string(), line, "missing object field 'generations'");
        GenerationEntry e;
        e.sample_id = j["id"].get<std::string>();
        if (j.contains("input") && j["input"].is_string()) e.input = j["input"].get<std::string>();
        const auto& gens = j["generations"];
        for (const auto& name : spec.generator_names) {
            if (!gens.contains(name) || !gens[name].is_string())
                fail(ErrorCode::inconsistent_embeddings,
                     "generation for '" + name + "' missing in sample '" + e.sample_id + "'");
            e.texts.push_back(gens[name].get<std::string>());
        }
        if (gens.size() != spec.generators())
            fail(ErrorCode::inconsistent_embeddings, "sample '" + e.sample_id + "' has extra generators");
        out.push_back(std::move(e));
    });
    return out;
}

std::vector<LabelEntry> read_labels(const fs::path& path, const EnsembleSpec& spec) {
    auto in = open_input(path);
    std::vector<LabelEntry> out;
    for_each_json_line(in, path.string(), [&](const Json& j, std::size_t line) {
        LabelEntry e;
        e.sample_id = j["id"].get<std::string>();
        try {
            if (j.contains("references")) e.references = j["references"].get<std::vector<std::string>>();
            if (j.contains("reference")) e.references.push_back(j["reference"].get<std::string>());
        } catch (const nlohmann::json::exception&) {
            parse_fail(path.string(), line, "references must be strings");
        }
        if (j.contains("quality")) {
            const auto& q = j["quality"];
            if (!q.is_object()) parse_fail(path.string(), line, "'quality' must map generator names to numbers");
            std::vector<double> values;
            for (const auto& name : spec.generator_names) {
                if (!q.contains(name) || !q[name].is_number())
                    fail(ErrorCode::inconsistent_embeddings,
                         "quality for '" + name + "' missing in sample '" + e.sample_id + "'");
                values.push_back(q[name].get<double>());
            }
            e.quality = std::move(values);
        }
        if (j.contains("key")) e.key = parse_vector(j["key"], path.string(), line, "key");
        if (e.references.empty() && !e.quality)
            parse_fail(path.string(), line, "label needs references or a quality vector");
        out.push_back(std::move(e));
    });
    return out;
}

DatasetManifest read_manifest_file(const fs::path& path) {
    auto in = open_input(path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::parse_error, path.string() + ": malformed manifest: " + e.what());
    }
    return DatasetManifest::from_json(j);
}

void write_manifest_file(const fs::path& path, const DatasetManifest& manifest) {
    write_file_atomic(path, manifest.to_json().dump(2) + "\n");
}

Dataset load_manifest(const fs::path& path) {
    Dataset ds;
    ds.manifest = read_manifest_file(path);
    const fs::path base = path.parent_path();
    const auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : base / p; };
    for (const auto* p : {&ds.manifest.generations_path, &ds.manifest.labels_path, &ds.manifest.input_keys_path})
        if (*p && !fs::exists(resolve(**p)))
            fail(ErrorCode::io_error, "manifest references missing file '" + resolve(**p).string() + "'");

    auto set = read_embeddings(resolve(ds.manifest.embeddings_path));
    if (!ds.manifest.generator_names.empty()) {
        if (ds.manifest.generator_names.size() != set.spec.generators())
            fail(ErrorCode::inconsistent_embeddings, "manifest lists " +
                                                         std::to_string(ds.manifest.generator_names.size()) +
                                                         " generators but embeddings have " +
                                                         std::to_string(set.spec.generators()));
        // Binary files carry no names; JSONL names must match the manifest.
        const bool default_names = set.spec.generator_names == EnsembleSpec::with_default_names(
                                                                   set.spec.generators(), 1).generator_names;
        if (!default_names && set.spec.generator_names != ds.manifest.generator_names)
            fail(ErrorCode::inconsistent_embeddings, "manifest generator names differ from the embeddings file");
        set.spec.generator_names = ds.manifest.generator_names;
    }
    if (ds.manifest.embedding_dim && *ds.manifest.embedding_dim != set.spec.embedding_dim)
        fail(ErrorCode::inconsistent_embeddings, "manifest embedding_dim " +
                                                     std::to_string(*ds.manifest.embedding_dim) +
                                                     " differs from the embeddings (" +
                                                     std::to_string(set.spec.embedding_dim) + ")");
    ds.spec = std::move(set.spec);
    ds.records = std::move(set.records);

    if (ds.manifest.input_keys_path) attach_input_keys(resolve(*ds.manifest.input_keys_path), ds.records);
    if (ds.manifest.generations_path) {
        ds.generations = read_generations(resolve(*ds.manifest.generations_path), ds.spec);
        std::vector<std::string> ids;
        for (const auto& g : *ds.generations) ids.push_back(g.sample_id);
        check_same_ids(ds.records, ids, "generations file");
    }
    if (ds.manifest.labels_path) {
        ds.labels = read_labels(resolve(*ds.manifest.labels_path), ds.spec);
        std::vector<std::string> ids;
        for (const auto& l : *ds.labels) ids.push_back(l.sample_id);
        check_same_ids(ds.records, ids, "labels file");
    }
    return ds;
}

Dataset load_embeddings_only(const fs::path& path) {
    Dataset ds;
    ds.manifest.embeddings_path = path;
    auto set = read_embeddings(path);
    ds.spec = std::move(set.spec);
    ds.records = std::move(set.records);
    return ds;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::out | std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::io_error, "cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) fail(ErrorCode::io_error, "failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        fail(ErrorCode::io_error, "cannot move output into place at '" + path.string() + "': " + ec.message());
    }
}

void write_estimates(const fs::path& path, std::span<const ThetaEstimate> estimates, const EnsembleSpec& spec,
                     const Json& provenance) {
    std::string out = header_line(provenance, spec).dump() + "\n";
    for (const auto& e : estimates) {
        if (e.scores.size() != spec.generators())
            fail(ErrorCode::inconsistent_embeddings, "estimate for '" + e.sample_id + "' has wrong length");
        Json j;
        j["id"] = e.sample_id;
        j["mode"] = to_string(e.mode);
        if (e.n0) j["n0"] = *e.n0;
        Json scores = Json::object();
        for (std::size_t g = 0; g < spec.generators(); ++g) scores[spec.generator_names[g]] = e.scores[g];
        j["scores"] = std::move(scores);
        j["clamped_triplets"] = e.clamped_triplets;
        out += j.dump() + "\n";
    }
    write_file_atomic(path, out);
}

EstimatesFile read_estimates(const fs::path& path) {
    auto [header, rows] = read_headed_jsonl(path);
    EstimatesFile file;
    file.provenance = header["provenance"];
    file.generator_names = generator_names_from_header(header, path.string());
    for (const auto& row : rows) {
        try {
            ThetaEstimate e;
            e.sample_id = row.at("id").get<std::string>();
            e.mode = parse_estimate_mode(row.at("mode").get<std::string>());
            if (row.contains("n0")) e.n0 = row["n0"].get<std::size_t>();
            for (const auto& name : file.generator_names) e.scores.push_back(row.at("scores").at(name).get<double>());
            e.clamped_triplets = row.value("clamped_triplets", std::size_t{0});
            file.estimates.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            fail(ErrorCode::parse_error, path.string() + ": malformed estimate row: " + ex.what());
        }
    }
    return file;
}

void write_decisions(const fs::path& path, std::span<const RoutingDecision> decisions, const EnsembleSpec& spec,
                     const std::vector<GenerationEntry>* generations, const Json& provenance) {
    if (generations && generations->size() != decisions.size())
        fail(ErrorCode::inconsistent_embeddings, "generations do not cover every routed sample");
    std::string out = header_line(provenance, spec).dump() + "\n";
    for (std::size_t s = 0; s < decisions.size(); ++s) {
        const auto& d = decisions[s];
        if (d.chosen >= spec.generators())
            fail(ErrorCode::invalid_argument, "decision for '" + d.sample_id + "' chooses a missing generator");
        Json j;
        j["id"] = d.sample_id;
        j["chosen"] = d.chosen;
        j["generator"] = spec.generator_names[d.chosen];
        j["method"] = d.method;
        j["scores"] = d.scores;
        if (generations) {
            const auto& g = (*generations)[s];
            if (g.sample_id != d.sample_id)
                fail(ErrorCode::inconsistent_embeddings, "generation ids differ from decision ids at '" +
                                                             d.sample_id + "'");
            j["generation"] = g.texts[d.chosen];
        }
        out += j.dump() + "\n";
    }
    write_file_atomic(path, out);
}

DecisionsFile read_decisions(const fs::path& path) {
    auto [header, rows] = read_headed_jsonl(path);
    DecisionsFile file;
    file.provenance = header["provenance"];
    file.generator_names = generator_names_from_header(header, path.string());
    for (const auto& row : rows) {
        try {
            RoutingDecision d;
            d.sample_id = row.at("id").get<std::string>();
            d.chosen = row.at("chosen").get<std::size_t>();
            d.method = row.value("method", std::string{});
            d.scores = row.at("scores").get<std::vector<double>>();
            if (d.chosen >= file.generator_names.size())
                fail(ErrorCode::parse_error, path.string() + ": decision index out of range");
            file.decisions.push_back(std::move(d));
        } catch (const nlohmann::json::exception& ex) {
            fail(ErrorCode::parse_error, path.string() + ": malformed decision row: " + ex.what());
        }
    }
    return file;
}

void write_truth(const fs::path& path, const SyntheticDataset& dataset, const Json& provenance) {
    Json j;
    j["provenance"] = provenance;
    j["seed"] = dataset.config.seed;
    j["generators"] = dataset.spec.generator_names;
    j["n"] = dataset.config.n;
    j["m"] = dataset.config.m;
    j["d"] = dataset.config.d;
    j["regions"] = dataset.config.regions;
    j["region_rule"] = to_string(dataset.config.rule);
    j["theta_profiles"] = dataset.config.region_theta;
    Json samples = Json::array();
    for (std::size_t s = 0; s < dataset.records.size(); ++s)
        samples.push_back(Json{{"id", dataset.records[s].sample_id},
                               {"theta", dataset.theta_truth[s]},
                               {"region", dataset.region_labels[s]}});
    j["samples"] = std::move(samples);
    write_file_atomic(path, j.dump() + "\n");
}

TruthFile read_truth(const fs::path& path) {
    auto in = open_input(path);
    TruthFile t;
    try {
        const Json j = Json::parse(in);
        t.generator_names = j.at("generators").get<std::vector<std::string>>();
        t.seed = j.value("seed", std::uint64_t{0});
        for (const auto& s : j.at("samples")) {
            t.sample_ids.push_back(s.at("id").get<std::string>());
            t.theta.push_back(s.at("theta").get<std::vector<double>>());
            t.regions.push_back(s.value("region", std::size_t{0}));
            if (t.theta.back().size() != t.generator_names.size())
                fail(ErrorCode::parse_error, path.string() + ": theta length differs from generator count");
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse_error, path.string() + ": malformed truth file: " + e.what());
    }
    return t;
}

Json report_to_json(const EvalReport& report, const Json& provenance) {
    Json j;
    j["provenance"] = provenance;
    j["samples"] = report.samples;
    Json metrics = Json::object();
    for (const auto& [name, value] : report.metrics) metrics[name] = value;
    j["metrics"] = std::move(metrics);
    if (report.spearman) j["spearman"] = *report.spearman;
    if (!report.rank_histogram.empty()) j["rank_histogram"] = report.rank_histogram;
    return j;
}

std::string report_to_csv(const EvalReport& report) {
    // Json::dump prints the shortest representation that round-trips.
    std::ostringstream out;
    out << "metric,value\n";
    for (const auto& [name, value] : report.metrics) out << name << ',' << Json(value).dump() << '\n';
    if (report.spearman) out << "spearman," << Json(*report.spearman).dump() << '\n';
    for (std::size_t r = 0; r < report.rank_histogram.size(); ++r)
        out << "rank_" << (r + 1) << ',' << report.rank_histogram[r] << '\n';
    return out.str();
}

}  // namespace routewise
