#include "routewise/routewise.h"

#include "routewise/error.hpp"
#include "routewise/estimator.hpp"
#include "routewise/evaluate.hpp"
#include "routewise/io.hpp"
#include "routewise/router.hpp"
#include "routewise/simulate.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <string>

using namespace routewise;

struct rw_dataset {
    Dataset data;
};

struct rw_estimates {
    EnsembleSpec spec;
    std::vector<ThetaEstimate> estimates;
};

struct rw_decisions {
    EnsembleSpec spec;
    std::vector<RoutingDecision> decisions;
};

struct rw_simulation {
    SyntheticDataset data;
};

struct rw_report {
    EvalReport report;
};

namespace {

thread_local std::string last_error;

rw_status to_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return RW_ERR_INVALID_ARGUMENT;
        case ErrorCode::empty_context: return RW_ERR_EMPTY_CONTEXT;
        case ErrorCode::inconsistent_embeddings: return RW_ERR_INCONSISTENT_EMBEDDINGS;
        case ErrorCode::ensemble_too_small: return RW_ERR_ENSEMBLE_TOO_SMALL;
        case ErrorCode::degenerate_triplet: return RW_ERR_DEGENERATE_TRIPLET;
        case ErrorCode::neighborhood_too_large: return RW_ERR_NEIGHBORHOOD_TOO_LARGE;
        case ErrorCode::empty_pool: return RW_ERR_EMPTY_POOL;
        case ErrorCode::duplicate_id: return RW_ERR_DUPLICATE_ID;
        case ErrorCode::parse_error: return RW_ERR_PARSE;
        case ErrorCode::io_error: return RW_ERR_IO;
        case ErrorCode::undefined_value: return RW_ERR_UNDEFINED;
    }
    return RW_ERR_INTERNAL;
}

template <typename Fn>
rw_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        return RW_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return RW_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return RW_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return RW_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (p == nullptr) fail(ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

Json parse_provenance(const char* text) {
    if (text == nullptr || *text == '\0') return Json::object();
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::parse_error, std::string("provenance is not valid JSON: ") + e.what());
    }
}

}  // namespace

extern "C" {

const char* rw_status_name(rw_status status) {
    switch (status) {
        case RW_OK: return "ok";
        case RW_ERR_INVALID_ARGUMENT: return "invalid argument";
        case RW_ERR_EMPTY_CONTEXT: return "empty context";
        case RW_ERR_INCONSISTENT_EMBEDDINGS: return "inconsistent embeddings";
        case RW_ERR_ENSEMBLE_TOO_SMALL: return "ensemble too small";
        case RW_ERR_DEGENERATE_TRIPLET: return "degenerate triplet";
        case RW_ERR_NEIGHBORHOOD_TOO_LARGE: return "neighborhood too large";
        case RW_ERR_EMPTY_POOL: return "empty train pool";
        case RW_ERR_DUPLICATE_ID: return "duplicate id";
        case RW_ERR_PARSE: return "parse error";
        case RW_ERR_IO: return "i/o error";
        case RW_ERR_UNDEFINED: return "undefined value";
        case RW_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* rw_last_error(void) { return last_error.c_str(); }

const char* rw_version(void) { return "0.1.0"; }

rw_status rw_dataset_open_manifest(const char* path, rw_dataset** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new rw_dataset{load_manifest(path)};
    });
}

rw_status rw_dataset_open_embeddings(const char* path, rw_dataset** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new rw_dataset{load_embeddings_only(path)};
    });
}

rw_status rw_dataset_from_arrays(size_t n, size_t m, size_t d, const char* const* sample_ids,
                                 const char* const* generator_names, const double* values, const double* input_keys,
                                 size_t key_dim, rw_dataset** out) {
    return guarded([&] {
        require(sample_ids, "sample_ids");
        require(values, "values");
        require(out, "out");
        Dataset ds;
        ds.spec = EnsembleSpec::with_default_names(m, d);
        if (generator_names)
            for (size_t g = 0; g < m; ++g) {
                require(generator_names[g], "generator name");
                ds.spec.generator_names[g] = generator_names[g];
            }
        if (input_keys && key_dim == 0) fail(ErrorCode::invalid_argument, "key_dim must be positive with input keys");
        for (size_t s = 0; s < n; ++s) {
            require(sample_ids[s], "sample id");
            EmbeddingRecord r;
            r.sample_id = sample_ids[s];
            r.dim = d;
            r.values.assign(values + s * m * d, values + (s + 1) * m * d);
            if (input_keys) r.input_key.emplace(input_keys + s * key_dim, input_keys + (s + 1) * key_dim);
            ds.records.push_back(std::move(r));
        }
        validate_records(ds.records, ds.spec);
        *out = new rw_dataset{std::move(ds)};
    });
}

void rw_dataset_free(rw_dataset* dataset) { delete dataset; }

size_t rw_dataset_size(const rw_dataset* dataset) { return dataset ? dataset->data.records.size() : 0; }
size_t rw_dataset_generators(const rw_dataset* dataset) { return dataset ? dataset->data.spec.generators() : 0; }
size_t rw_dataset_dim(const rw_dataset* dataset) { return dataset ? dataset->data.spec.embedding_dim : 0; }

const char* rw_dataset_sample_id(const rw_dataset* dataset, size_t sample) {
    if (!dataset || sample >= dataset->data.records.size()) return nullptr;
    return dataset->data.records[sample].sample_id.c_str();
}

const char* rw_dataset_generator_name(const rw_dataset* dataset, size_t generator) {
    if (!dataset || generator >= dataset->data.spec.generators()) return nullptr;
    return dataset->data.spec.generator_names[generator].c_str();
}

int rw_dataset_has_generations(const rw_dataset* dataset) {
    return dataset && dataset->data.generations.has_value() ? 1 : 0;
}

int rw_dataset_has_labels(const rw_dataset* dataset) { return dataset && dataset->data.labels.has_value() ? 1 : 0; }

rw_status rw_dataset_embedding(const rw_dataset* dataset, size_t sample, size_t generator, double* out,
                               size_t capacity) {
    return guarded([&] {
        require(dataset, "dataset");
        require(out, "out");
        const auto& ds = dataset->data;
        if (sample >= ds.records.size() || generator >= ds.spec.generators())
            fail(ErrorCode::invalid_argument, "sample or generator index out of range");
        if (capacity < ds.spec.embedding_dim) fail(ErrorCode::invalid_argument, "output buffer too small");
        const auto v = ds.records[sample].embedding(generator);
        std::memcpy(out, v.data(), v.size() * sizeof(double));
    });
}

rw_status rw_dataset_write_embeddings(const rw_dataset* dataset, const char* path, rw_format format,
                                      const char* provenance_json) {
    return guarded([&] {
        require(dataset, "dataset");
        require(path, "path");
        const EmbeddingSet set{dataset->data.spec, dataset->data.records};
        if (format == RW_FORMAT_SMB1)
            write_embeddings_binary(path, set);
        else
            write_embeddings_jsonl(path, set, parse_provenance(provenance_json));
    });
}

void rw_estimate_options_init(rw_estimate_options* options) {
    if (!options) return;
    options->mode = RW_MODE_GLOBAL;
    options->n0 = 1;
    options->metric = RW_METRIC_EUCLIDEAN;
}

rw_status rw_estimate(const rw_dataset* data, const rw_dataset* train_pool, const rw_estimate_options* options,
                      rw_estimates** out) {
    return guarded([&] {
        require(data, "data");
        require(options, "options");
        require(out, "out");
        const auto& ds = data->data;
        const auto metric = options->metric == RW_METRIC_COSINE ? DistanceMetric::cosine : DistanceMetric::euclidean;
        auto result = std::make_unique<rw_estimates>();
        result->spec = ds.spec;
        switch (options->mode) {
            case RW_MODE_GLOBAL:
                result->estimates = estimate_global_per_sample(ds.records, ds.spec);
                break;
            case RW_MODE_LOCAL: {
                const RecordSpan samples(ds.records);
                // Checked before the index is built so the error names the real problem.
                if (options->n0 >= ds.records.size())
                    fail(ErrorCode::neighborhood_too_large,
                         "neighborhood too large: n0 = " + std::to_string(options->n0) + " but only " +
                             std::to_string(ds.records.size()) + " samples (n0 < n required)");
                const auto index = build_neighbor_index(samples, metric);
                result->estimates = estimate_local(samples, ds.spec, index, options->n0);
                break;
            }
            case RW_MODE_TRAIN: {
                require(train_pool, "train_pool");
                const auto& pool = train_pool->data;
                if (pool.spec.generator_names != ds.spec.generator_names ||
                    pool.spec.embedding_dim != ds.spec.embedding_dim)
                    fail(ErrorCode::inconsistent_embeddings, "train pool and test set describe different ensembles");
                result->estimates = estimate_train(ds.records, pool.records, ds.spec, options->n0, metric);
                break;
            }
            default:
                fail(ErrorCode::invalid_argument, "unknown estimation mode");
        }
        *out = result.release();
    });
}

void rw_estimates_free(rw_estimates* estimates) { delete estimates; }
size_t rw_estimates_size(const rw_estimates* estimates) { return estimates ? estimates->estimates.size() : 0; }
size_t rw_estimates_generators(const rw_estimates* estimates) { return estimates ? estimates->spec.generators() : 0; }

rw_status rw_estimates_scores(const rw_estimates* estimates, size_t sample, double* out, size_t capacity) {
    return guarded([&] {
        require(estimates, "estimates");
        require(out, "out");
        if (sample >= estimates->estimates.size()) fail(ErrorCode::invalid_argument, "sample index out of range");
        const auto& scores = estimates->estimates[sample].scores;
        if (capacity < scores.size()) fail(ErrorCode::invalid_argument, "output buffer too small");
        std::memcpy(out, scores.data(), scores.size() * sizeof(double));
    });
}

size_t rw_estimates_clamped_triplets(const rw_estimates* estimates) {
    if (!estimates) return 0;
    size_t total = 0;
    for (const auto& e : estimates->estimates) total += e.clamped_triplets;
    return total;
}

rw_status rw_estimates_write(const rw_estimates* estimates, const char* path, const char* provenance_json) {
    return guarded([&] {
        require(estimates, "estimates");
        require(path, "path");
        write_estimates(path, estimates->estimates, estimates->spec, parse_provenance(provenance_json));
    });
}

rw_status rw_route(const rw_estimates* estimates, rw_decisions** out) {
    return guarded([&] {
        require(estimates, "estimates");
        require(out, "out");
        *out = new rw_decisions{estimates->spec, route_all(estimates->estimates)};
    });
}

void rw_decisions_free(rw_decisions* decisions) { delete decisions; }
size_t rw_decisions_size(const rw_decisions* decisions) { return decisions ? decisions->decisions.size() : 0; }

size_t rw_decisions_chosen(const rw_decisions* decisions, size_t sample) {
    if (!decisions || sample >= decisions->decisions.size()) return std::numeric_limits<size_t>::max();
    return decisions->decisions[sample].chosen;
}

rw_status rw_decisions_write(const rw_decisions* decisions, const rw_dataset* source, const char* path,
                             const char* provenance_json) {
    return guarded([&] {
        require(decisions, "decisions");
        require(path, "path");
        const std::vector<GenerationEntry>* generations = nullptr;
        if (source && source->data.generations) generations = &*source->data.generations;
        write_decisions(path, decisions->decisions, decisions->spec, generations, parse_provenance(provenance_json));
    });
}

void rw_sim_config_init(rw_sim_config* config) {
    if (!config) return;
    *config = rw_sim_config{};
    config->regions = 1;
    config->rule = RW_REGIONS_ROUND_ROBIN;
    config->region_spread = 1.0;
    config->centroid_distance = 10.0;
}

rw_status rw_simulate(const rw_sim_config* config, rw_simulation** out) {
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        require(config->theta, "theta");
        if (config->m < 3)
            fail(ErrorCode::ensemble_too_small, "ensemble too small: simulated datasets need m >= 3");
        SyntheticConfig c;
        c.n = config->n;
        c.m = config->m;
        c.d = config->d;
        for (size_t p = 0; p < config->theta_profiles; ++p)
            c.region_theta.emplace_back(config->theta + p * config->m, config->theta + (p + 1) * config->m);
        c.regions = config->regions;
        c.rule = config->rule == RW_REGIONS_CONTIGUOUS ? RegionRule::contiguous : RegionRule::round_robin;
        c.region_spread = config->region_spread;
        c.centroid_distance = config->centroid_distance;
        c.seed = config->seed;
        *out = new rw_simulation{c.regions > 1 ? sample_piecewise(c) : sample_dataset(c)};
    });
}

void rw_simulation_free(rw_simulation* simulation) { delete simulation; }

rw_status rw_simulation_dataset(const rw_simulation* simulation, rw_dataset** out) {
    return guarded([&] {
        require(simulation, "simulation");
        require(out, "out");
        Dataset ds;
        ds.spec = simulation->data.spec;
        ds.records = simulation->data.records;
        *out = new rw_dataset{std::move(ds)};
    });
}

rw_status rw_simulation_write(const rw_simulation* simulation, const char* embeddings_path, const char* truth_path,
                              const char* manifest_path, const char* provenance_json) {
    return guarded([&] {
        require(simulation, "simulation");
        require(embeddings_path, "embeddings_path");
        require(truth_path, "truth_path");
        const auto provenance = parse_provenance(provenance_json);
        const auto& sim = simulation->data;
        write_embeddings_jsonl(embeddings_path, EmbeddingSet{sim.spec, sim.records}, provenance);
        write_truth(truth_path, sim, provenance);
        if (manifest_path) {
            DatasetManifest manifest;
            manifest.generator_names = sim.spec.generator_names;
            manifest.embedding_dim = sim.spec.embedding_dim;
            // Stored relative to the manifest so the directory can be moved.
            const std::filesystem::path manifest_dir = std::filesystem::path(manifest_path).parent_path();
            manifest.embeddings_path =
                std::filesystem::path(embeddings_path).lexically_relative(manifest_dir.empty() ? "." : manifest_dir);
            if (manifest.embeddings_path.empty()) manifest.embeddings_path = embeddings_path;
            write_manifest_file(manifest_path, manifest);
        }
    });
}

rw_status rw_evaluate_truth(const char* estimates_path, const char* truth_path, rw_report** out) {
    return guarded([&] {
        require(estimates_path, "estimates_path");
        require(truth_path, "truth_path");
        require(out, "out");
        *out = new rw_report{evaluate_against_truth(read_estimates(estimates_path), read_truth(truth_path))};
    });
}

void rw_eval_options_init(rw_eval_options* options) {
    if (!options) return;
    options->val_labels_path = nullptr;
    options->val_size = 50;
    options->val_draws = 10;
    options->seed = 0;
    options->knn_k = kDefaultLabeledNeighbors;
}

rw_status rw_evaluate_routing(const char* decisions_path, const rw_dataset* labeled, const rw_eval_options* options,
                              rw_report** out) {
    return guarded([&] {
        require(decisions_path, "decisions_path");
        require(labeled, "labeled");
        require(out, "out");
        const auto& ds = labeled->data;
        if (!ds.labels) fail(ErrorCode::invalid_argument, "dataset has no labels to evaluate against");

        const auto decisions = read_decisions(decisions_path);
        if (decisions.generator_names != ds.spec.generator_names)
            fail(ErrorCode::inconsistent_embeddings, "decisions and dataset list different generators");
        if (decisions.decisions.size() != ds.records.size())
            fail(ErrorCode::inconsistent_embeddings, "decisions do not cover every labeled sample");
        for (size_t s = 0; s < ds.records.size(); ++s)
            if (decisions.decisions[s].sample_id != ds.records[s].sample_id)
                fail(ErrorCode::inconsistent_embeddings,
                     "decision ids differ from dataset ids at '" + ds.records[s].sample_id + "'");

        const auto quality = quality_matrix(*ds.labels, ds.generations ? &*ds.generations : nullptr,
                                            ds.manifest.task_metric);

        rw_eval_options defaults;
        rw_eval_options_init(&defaults);
        const rw_eval_options& opts = options ? *options : defaults;

        ValidationSet validation;
        std::vector<std::vector<double>> test_keys;
        if (opts.val_labels_path) {
            for (auto& entry : read_labels(opts.val_labels_path, ds.spec)) {
                if (!entry.quality)
                    fail(ErrorCode::invalid_argument,
                         "validation sample '" + entry.sample_id + "' needs a quality vector");
                validation.examples.push_back(
                    LabeledExample{entry.sample_id, entry.references.empty() ? "" : entry.references.front(),
                                   *entry.quality, entry.key});
            }
            validation.sample_size = opts.val_size;
            validation.draws = opts.val_draws;
            validation.seed = opts.seed;
            validation.knn_k = opts.knn_k;

            bool val_keyed = !validation.examples.empty();
            for (const auto& ex : validation.examples) val_keyed = val_keyed && ex.key.has_value();
            bool records_keyed = true, labels_keyed = true;
            for (size_t s = 0; s < ds.records.size(); ++s) {
                records_keyed = records_keyed && ds.records[s].input_key.has_value();
                labels_keyed = labels_keyed && (*ds.labels)[s].key.has_value();
            }
            if (val_keyed && (records_keyed || labels_keyed))
                for (size_t s = 0; s < ds.records.size(); ++s)
                    test_keys.push_back(records_keyed ? *ds.records[s].input_key : *(*ds.labels)[s].key);
        }
        *out = new rw_report{evaluate_routing(decisions.decisions, quality,
                                              opts.val_labels_path ? &validation : nullptr, test_keys)};
    });
}

void rw_report_free(rw_report* report) { delete report; }

int rw_report_metric(const rw_report* report, const char* name, double* value) {
    if (!report || !name) return 0;
    const auto it = report->report.metrics.find(name);
    if (it == report->report.metrics.end()) return 0;
    if (value) *value = it->second;
    return 1;
}

int rw_report_spearman(const rw_report* report, double* value) {
    if (!report || !report->report.spearman) return 0;
    if (value) *value = *report->report.spearman;
    return 1;
}

rw_status rw_report_write(const rw_report* report, const char* json_path, const char* csv_path,
                          const char* provenance_json) {
    return guarded([&] {
        require(report, "report");
        require(json_path, "json_path");
        write_file_atomic(json_path, report_to_json(report->report, parse_provenance(provenance_json)).dump(2) + "\n");
        if (csv_path) write_file_atomic(csv_path, report_to_csv(report->report));
    });
}

rw_status rw_validate_output(const char* path, rw_output_kind kind, size_t expected_rows) {
    return guarded([&] {
        require(path, "path");
        size_t rows = expected_rows;
        switch (kind) {
            case RW_OUTPUT_EMBEDDINGS: rows = read_embeddings(path).records.size(); break;
            case RW_OUTPUT_ESTIMATES: rows = read_estimates(path).estimates.size(); break;
            case RW_OUTPUT_DECISIONS: rows = read_decisions(path).decisions.size(); break;
            case RW_OUTPUT_TRUTH: rows = read_truth(path).sample_ids.size(); break;
            case RW_OUTPUT_REPORT: {
                std::ifstream in(path);
                if (!in) fail(ErrorCode::io_error, std::string("cannot open '") + path + "'");
                try {
                    const auto j = Json::parse(in);
                    if (!j.contains("metrics")) fail(ErrorCode::parse_error, "report lacks metrics");
                } catch (const nlohmann::json::parse_error& e) {
                    fail(ErrorCode::parse_error, std::string("malformed report: ") + e.what());
                }
                break;
            }
            default: fail(ErrorCode::invalid_argument, "unknown output kind");
        }
        if (rows != expected_rows)
            fail(ErrorCode::parse_error, std::string(path) + " holds " + std::to_string(rows) + " rows, expected " +
                                             std::to_string(expected_rows));
    });
}

}  // extern "C"
