// Command-line front end. Talks to the library only through routewise.h.
#include <routewise/routewise.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Everything needed to rerun a command; embedded in every output file.
struct RunConfig {
    std::string command;
    std::string mode = "global";
    std::size_t n0 = 1;
    std::string train_manifest;
    std::string knn_metric = "euclidean";
    std::uint64_t seed = 0;
    std::string output_path;
    Json inputs = Json::object();

    Json to_json() const {
        Json j;
        j["tool"] = "routewise";
        j["version"] = rw_version();
        j["command"] = command;
        if (command == "estimate" || command == "route") {
            j["mode"] = mode;
            if (mode != "global") j["n0"] = n0;
            if (mode == "train") j["train_manifest"] = train_manifest;
            j["knn_metric"] = knn_metric;
        }
        j["seed"] = seed;
        j["output_path"] = output_path;
        j["inputs"] = inputs;
        return j;
    }
};

struct CliFailure {
    int exit_code;
};

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void check(rw_status status, const std::string& what) {
    if (status == RW_OK) return;
    std::cerr << "routewise: " << what << ": " << rw_last_error() << " [" << rw_status_name(status) << "]\n";
    throw CliFailure{kExitFailure};
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using DatasetPtr = std::unique_ptr<rw_dataset, Deleter<rw_dataset, rw_dataset_free>>;
using EstimatesPtr = std::unique_ptr<rw_estimates, Deleter<rw_estimates, rw_estimates_free>>;
using DecisionsPtr = std::unique_ptr<rw_decisions, Deleter<rw_decisions, rw_decisions_free>>;
using SimulationPtr = std::unique_ptr<rw_simulation, Deleter<rw_simulation, rw_simulation_free>>;
using ReportPtr = std::unique_ptr<rw_report, Deleter<rw_report, rw_report_free>>;

DatasetPtr open_dataset(const std::string& manifest, const std::string& embeddings) {
    rw_dataset* raw = nullptr;
    if (!manifest.empty())
        check(rw_dataset_open_manifest(manifest.c_str(), &raw), "loading manifest " + manifest);
    else
        check(rw_dataset_open_embeddings(embeddings.c_str(), &raw), "loading embeddings " + embeddings);
    return DatasetPtr(raw);
}

void validate(const std::string& path, rw_output_kind kind, std::size_t rows) {
    check(rw_validate_output(path.c_str(), kind, rows), "validating " + path);
}

// Inputs shared by estimate and route.
struct EstimateArgs {
    std::string manifest;
    std::string embeddings = "embeddings.jsonl";
    std::string mode = "global";
    std::size_t n0 = 1;
    std::string train_manifest;
    std::string train_embeddings;
    std::string metric = "euclidean";
    std::string out;
};

void add_estimate_options(CLI::App* cmd, EstimateArgs& args) {
    auto* manifest = cmd->add_option("--manifest", args.manifest, "dataset manifest")->check(CLI::ExistingFile);
    cmd->add_option("--embeddings", args.embeddings, "embedding file (JSONL or SMB1)")
        ->capture_default_str()
        ->excludes(manifest);
    cmd->add_option("--mode", args.mode, "estimation mode")
        ->capture_default_str()
        ->check(CLI::IsMember({"global", "local", "train"}));
    cmd->add_option("--n0", args.n0, "neighborhood size for local and train modes")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    auto* tm = cmd->add_option("--train-manifest", args.train_manifest, "training pool manifest")
                   ->check(CLI::ExistingFile);
    cmd->add_option("--train-embeddings", args.train_embeddings, "training pool embedding file")
        ->check(CLI::ExistingFile)
        ->excludes(tm);
    cmd->add_option("--metric", args.metric, "neighbor distance")
        ->capture_default_str()
        ->check(CLI::IsMember({"euclidean", "cosine"}));
}

struct Estimated {
    DatasetPtr data;
    EstimatesPtr estimates;
    RunConfig config;
};

Estimated run_estimate(const EstimateArgs& args, const std::string& command) {
    Estimated r;
    r.config.command = command;
    r.config.mode = args.mode;
    r.config.n0 = args.n0;
    r.config.knn_metric = args.metric;
    r.config.output_path = args.out;
    if (!args.manifest.empty())
        r.config.inputs["manifest"] = args.manifest;
    else
        r.config.inputs["embeddings"] = args.embeddings;

    r.data = open_dataset(args.manifest, args.embeddings);

    rw_estimate_options opts;
    rw_estimate_options_init(&opts);
    opts.mode = args.mode == "local" ? RW_MODE_LOCAL : args.mode == "train" ? RW_MODE_TRAIN : RW_MODE_GLOBAL;
    opts.n0 = args.n0;
    opts.metric = args.metric == "cosine" ? RW_METRIC_COSINE : RW_METRIC_EUCLIDEAN;

    DatasetPtr pool;
    if (opts.mode == RW_MODE_TRAIN) {
        if (args.train_manifest.empty() && args.train_embeddings.empty()) {
            std::cerr << "routewise: --mode train needs --train-manifest or --train-embeddings\n";
            throw CliFailure{kExitUsage};
        }
        r.config.train_manifest = args.train_manifest.empty() ? args.train_embeddings : args.train_manifest;
        pool = open_dataset(args.train_manifest, args.train_embeddings);
    }

    const auto start = std::chrono::steady_clock::now();
    rw_estimates* raw = nullptr;
    check(rw_estimate(r.data.get(), pool.get(), &opts, &raw), "estimating");
    r.estimates.reset(raw);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double n = static_cast<double>(rw_dataset_size(r.data.get()));
    std::fprintf(stderr, "routewise: estimated %zu samples in %.3f s (%.3f s per 1000 samples)\n",
                 rw_dataset_size(r.data.get()), seconds, n > 0 ? seconds * 1000.0 / n : 0.0);
    return r;
}

int cmd_estimate(const EstimateArgs& args) {
    auto r = run_estimate(args, "estimate");
    const std::string prov = r.config.to_json().dump();
    check(rw_estimates_write(r.estimates.get(), args.out.c_str(), prov.c_str()), "writing " + args.out);
    validate(args.out, RW_OUTPUT_ESTIMATES, rw_estimates_size(r.estimates.get()));
    return 0;
}

int cmd_route(const EstimateArgs& args) {
    auto r = run_estimate(args, "route");
    rw_decisions* raw = nullptr;
    check(rw_route(r.estimates.get(), &raw), "routing");
    DecisionsPtr decisions(raw);
    const std::string prov = r.config.to_json().dump();
    check(rw_decisions_write(decisions.get(), r.data.get(), args.out.c_str(), prov.c_str()), "writing " + args.out);
    validate(args.out, RW_OUTPUT_DECISIONS, rw_decisions_size(decisions.get()));
    return 0;
}

struct SimulateArgs {
    std::size_t n = 2000;
    std::size_t m = 5;
    std::size_t d = 64;
    std::uint64_t seed = 0;
    std::vector<std::string> theta;
    std::size_t regions = 1;
    std::string rule = "round_robin";
    double spread = 1.0;
    double centroid_distance = 10.0;
    std::string out_dir = ".";
};

std::vector<double> parse_profile(const std::string& text, std::size_t m) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto piece = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(piece, &used));
            if (used != piece.size()) throw std::invalid_argument(piece);
        } catch (const std::exception&) {
            std::cerr << "routewise: --theta expects comma-separated numbers, got '" << text << "'\n";
            throw CliFailure{kExitUsage};
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.size() != m) {
        std::cerr << "routewise: --theta profile '" << text << "' has " << out.size() << " values, expected " << m
                  << '\n';
        throw CliFailure{kExitUsage};
    }
    return out;
}

int cmd_simulate(const SimulateArgs& args) {
    std::vector<double> theta;
    std::size_t profiles = 0;
    if (args.theta.empty()) {
        // Log-spaced over [0.5, 8].
        for (std::size_t g = 0; g < args.m; ++g) {
            const double t = args.m > 1 ? static_cast<double>(g) / static_cast<double>(args.m - 1) : 0.0;
            theta.push_back(0.5 * std::pow(16.0, t));
        }
        profiles = 1;
    } else {
        for (const auto& p : args.theta) {
            auto row = parse_profile(p, args.m);
            theta.insert(theta.end(), row.begin(), row.end());
        }
        profiles = args.theta.size();
    }

    rw_sim_config cfg;
    rw_sim_config_init(&cfg);
    cfg.n = args.n;
    cfg.m = args.m;
    cfg.d = args.d;
    cfg.theta = theta.data();
    cfg.theta_profiles = profiles;
    cfg.regions = args.regions;
    cfg.rule = args.rule == "contiguous" ? RW_REGIONS_CONTIGUOUS : RW_REGIONS_ROUND_ROBIN;
    cfg.region_spread = args.spread;
    cfg.centroid_distance = args.centroid_distance;
    cfg.seed = args.seed;

    rw_simulation* raw = nullptr;
    check(rw_simulate(&cfg, &raw), "simulating");
    SimulationPtr sim(raw);

    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec) {
        std::cerr << "routewise: cannot create " << args.out_dir << ": " << ec.message() << '\n';
        return kExitFailure;
    }
    const fs::path dir(args.out_dir);
    const std::string emb = (dir / "embeddings.jsonl").string();
    const std::string truth = (dir / "truth.json").string();
    const std::string manifest = (dir / "manifest.json").string();

    RunConfig config;
    config.command = "simulate";
    config.seed = args.seed;
    config.output_path = args.out_dir;
    config.inputs = {{"n", args.n},
                     {"m", args.m},
                     {"d", args.d},
                     {"theta", theta},
                     {"theta_profiles", profiles},
                     {"regions", args.regions},
                     {"region_rule", args.rule},
                     {"region_spread", args.spread},
                     {"centroid_distance", args.centroid_distance}};
    const std::string prov = config.to_json().dump();
    check(rw_simulation_write(sim.get(), emb.c_str(), truth.c_str(), manifest.c_str(), prov.c_str()),
          "writing simulation to " + args.out_dir);
    validate(emb, RW_OUTPUT_EMBEDDINGS, args.n);
    validate(truth, RW_OUTPUT_TRUTH, args.n);
    return 0;
}

struct EvaluateArgs {
    bool against_truth = false;
    std::string estimates = "estimates.jsonl";
    std::string truth = "truth.json";
    std::string decisions = "decisions.jsonl";
    std::string manifest;
    std::string val_labels;
    std::size_t val_size = 50;
    std::size_t val_draws = 10;
    std::uint64_t seed = 0;
    std::size_t knn_k = 20;
    std::string out = "report.json";
    std::string csv;
};

int cmd_evaluate(const EvaluateArgs& args) {
    RunConfig config;
    config.command = "evaluate";
    config.seed = args.seed;
    config.output_path = args.out;

    rw_report* raw = nullptr;
    if (args.against_truth) {
        config.inputs = {{"estimates", args.estimates}, {"truth", args.truth}};
        check(rw_evaluate_truth(args.estimates.c_str(), args.truth.c_str(), &raw), "evaluating against truth");
    } else {
        if (args.manifest.empty()) {
            std::cerr << "routewise: routing evaluation needs --manifest with labels (or use --against-truth)\n";
            return kExitUsage;
        }
        config.inputs = {{"decisions", args.decisions},
                         {"manifest", args.manifest},
                         {"val_size", args.val_size},
                         {"val_draws", args.val_draws},
                         {"knn_k", args.knn_k}};
        if (!args.val_labels.empty()) config.inputs["val_labels"] = args.val_labels;
        auto labeled = open_dataset(args.manifest, "");
        rw_eval_options opts;
        rw_eval_options_init(&opts);
        opts.val_labels_path = args.val_labels.empty() ? nullptr : args.val_labels.c_str();
        opts.val_size = args.val_size;
        opts.val_draws = args.val_draws;
        opts.seed = args.seed;
        opts.knn_k = args.knn_k;
        check(rw_evaluate_routing(args.decisions.c_str(), labeled.get(), &opts, &raw), "evaluating routing");
    }
    ReportPtr report(raw);
    const std::string prov = config.to_json().dump();
    check(rw_report_write(report.get(), args.out.c_str(), args.csv.empty() ? nullptr : args.csv.c_str(),
                          prov.c_str()),
          "writing " + args.out);
    validate(args.out, RW_OUTPUT_REPORT, 0);

    double rho = 0.0;
    if (rw_report_spearman(report.get(), &rho)) std::fprintf(stderr, "routewise: spearman %.6f\n", rho);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised per-sample routing over an ensemble of generators"};
    app.require_subcommand(1);
    app.set_version_flag("--version", rw_version());

    EstimateArgs est;
    est.out = "estimates.jsonl";
    auto* estimate = app.add_subcommand("estimate", "score every generator on every sample");
    add_estimate_options(estimate, est);
    estimate->add_option("--out", est.out, "output file")->capture_default_str();

    EstimateArgs rt;
    rt.out = "decisions.jsonl";
    auto* route = app.add_subcommand("route", "pick one generator per sample");
    add_estimate_options(route, rt);
    route->add_option("--out", rt.out, "output file")->capture_default_str();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "sample a synthetic dataset with known generator quality");
    simulate->add_option("--n", sim.n, "samples")->capture_default_str()->check(CLI::PositiveNumber);
    simulate->add_option("--m", sim.m, "generators")->capture_default_str();
    simulate->add_option("--d", sim.d, "embedding dimension")->capture_default_str()->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim.seed, "random seed")->capture_default_str();
    simulate->add_option("--theta", sim.theta,
                         "comma-separated quality profile; repeat for one profile per region group "
                         "(default: log-spaced over [0.5, 8])");
    simulate->add_option("--regions", sim.regions, "latent regions")->capture_default_str()->check(CLI::PositiveNumber);
    simulate->add_option("--region-rule", sim.rule, "sample-to-region assignment")
        ->capture_default_str()
        ->check(CLI::IsMember({"round_robin", "contiguous"}));
    simulate->add_option("--region-spread", sim.spread, "latent spread around each centroid")->capture_default_str();
    simulate->add_option("--centroid-distance", sim.centroid_distance, "distance between region centroids")
        ->capture_default_str();
    simulate->add_option("--out-dir", sim.out_dir, "output directory")->capture_default_str();

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "score estimates or routing decisions");
    evaluate->add_flag("--against-truth", ev.against_truth, "compare estimates with a simulation truth file");
    evaluate->add_option("--estimates", ev.estimates, "estimates file")->capture_default_str();
    evaluate->add_option("--truth", ev.truth, "truth sidecar")->capture_default_str();
    evaluate->add_option("--decisions", ev.decisions, "decisions file")->capture_default_str();
    evaluate->add_option("--manifest", ev.manifest, "labeled dataset manifest")->check(CLI::ExistingFile);
    evaluate->add_option("--val-labels", ev.val_labels, "labeled validation set for supervised baselines")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--val-size", ev.val_size, "validation draw size")->capture_default_str();
    evaluate->add_option("--val-draws", ev.val_draws, "validation draws")->capture_default_str();
    evaluate->add_option("--seed", ev.seed, "random seed for validation draws")->capture_default_str();
    evaluate->add_option("--knn-k", ev.knn_k, "neighbors for the labeled KNN baseline")->capture_default_str();
    evaluate->add_option("--out", ev.out, "report file")->capture_default_str();
    evaluate->add_option("--csv", ev.csv, "also write the report as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*estimate) return cmd_estimate(est);
        if (*route) return cmd_route(rt);
        if (*simulate) return cmd_simulate(sim);
        if (*evaluate) return cmd_evaluate(ev);
    } catch (const CliFailure& f) {
        return f.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "routewise: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
