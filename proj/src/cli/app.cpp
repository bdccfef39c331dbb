#include "stereo/cli/app.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "stereo/agent/planner.hpp"
#include "stereo/agent/rule_based.hpp"
#include "stereo/agent/toolbox.hpp"
#include "stereo/backends/http.hpp"
#include "stereo/backends/synthetic.hpp"
#include "stereo/cli/config.hpp"
#include "stereo/dataset/corpus.hpp"
#include "stereo/dataset/fixture.hpp"
#include "stereo/error.hpp"
#include "stereo/evaluation/accuracy.hpp"
#include "stereo/evaluation/agreement.hpp"
#include "stereo/evaluation/batch.hpp"
#include "stereo/evaluation/benchmark.hpp"
#include "stereo/prompt_text.hpp"
#include "stereo/rng.hpp"

#ifndef STEREO_VERSION
#define STEREO_VERSION "0.0.0"
#endif
#ifndef STEREO_DATA_DIR
#define STEREO_DATA_DIR "data"
#endif

namespace stereo::cli {

namespace {

namespace fs = std::filesystem;

// Settings that never reach a manifest.
bool secret(const std::string& key) { return key == "token"; }

struct Flags {
    Settings values;
    std::string config_path;
    std::string from_manifest;
};

struct Manifest {
    Settings config;
    Json args = Json::object();
};

Manifest read_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Config, "cannot open manifest " + path.string());
    const auto j = Json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("stereo_manifest") || !j.contains("config")) {
        throw Error(ErrorCode::Config, path.string() + " is not a run manifest");
    }
    Manifest m;
    for (const auto& [k, v] : j.at("config").items()) m.config[k] = v.get<std::string>();
    m.args = j.value("args", Json::object());
    return m;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
}

void write_manifest(const RunConfig& c, std::string_view command, const Json& args, const Json& extra = Json::object()) {
    Settings recorded;
    for (const auto& [k, v] : c.resolved) {
        if (!secret(k)) recorded[k] = v;
    }
    Json j;
    j["stereo_manifest"] = 1;
    j["version"] = STEREO_VERSION;
    j["command"] = command;
    j["args"] = args;
    Json config = Json::object();
    for (const auto& [k, v] : recorded) config[k] = v;
    j["config"] = config;
    j["config_hash"] = config_hash(recorded);
    j["taxonomy_hash"] = taxonomy_hash();
    for (const auto& [k, v] : extra.items()) j[k] = v;
    fs::create_directories(c.out);
    write_text(c.out / "manifest.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Backend wiring

std::shared_ptr<const InstructionStore> load_store_for(const RunConfig& c) {
    if (!fs::exists(c.store)) {
        spdlog::warn("store {} does not exist; continuing with an empty store", c.store.string());
        return std::make_shared<const InstructionStore>();
    }
    return std::make_shared<const InstructionStore>(open_store(c.store));
}

std::shared_ptr<ClassifierBackend> synthetic_classifier(const std::string& spec, std::int64_t seed) {
    if (spec == "oracle") return std::make_shared<OracleClassifier>();
    if (spec.rfind("noisy:", 0) == 0) {
        double diagonal = 0.0;
        double none_share = 0.05;
        std::istringstream in(spec.substr(6));
        char colon = 0;
        if (!(in >> diagonal) || ((in >> colon) && (colon != ':' || !(in >> none_share))) || !in.eof()) {
            if (!in.eof()) throw Error(ErrorCode::Config, "bad classifier spec '" + spec + "'");
        }
        if (diagonal <= 0.0 || diagonal > 1.0 || none_share < 0.0 || diagonal + none_share > 1.0) {
            throw Error(ErrorCode::Config, "classifier probabilities out of range in '" + spec + "'");
        }
        return std::make_shared<NoisyClassifier>(
            NoisyClassifier::uniform(diagonal, none_share, combine_seed(static_cast<std::uint64_t>(seed), fnv1a64("classifier"))));
    }
    throw Error(ErrorCode::Config, "classifier must be 'oracle' or 'noisy:<diagonal>[:<none share>]', got '" + spec + "'");
}

struct Backends {
    std::shared_ptr<ChatProvider> chat;
    std::shared_ptr<const InstructionStore> store;
    std::shared_ptr<ImageBackend> images;
    /// Set when generation is synthetic; remembers signatures for annotation.
    std::shared_ptr<RecordingImageBackend> recording;
    std::shared_ptr<ClassifierBackend> classifier;
};

Backends make_backends(const RunConfig& c) {
    Backends b;
    b.store = load_store_for(c);
    if (c.chat.live) {
        b.chat = std::make_shared<HttpChatProvider>(c.chat.endpoint);
    } else {
        b.chat = std::make_shared<RuleBasedProvider>(c.model);
    }
    if (c.generate.live) {
        b.images = std::make_shared<HttpImageBackend>(c.generate.endpoint, c.out / "images");
        fs::create_directories(c.out / "images");
    } else {
        auto store = b.store;
        fs::path artifacts;
        if (c.save_images) {
            artifacts = c.out / "images";
            fs::create_directories(artifacts);
        }
        auto world = std::make_shared<SyntheticImageBackend>(
            [store](const std::string& id) { return benchmark_world_spec(id, *store); }, artifacts);
        b.recording = std::make_shared<RecordingImageBackend>(world);
        b.images = b.recording;
    }
    if (c.classify.live) {
        b.classifier = std::make_shared<HttpClassifier>(c.classify.endpoint);
    } else {
        b.classifier = synthetic_classifier(c.classifier, c.seed);
    }
    return b;
}

PlannerConfig planner_config(const RunConfig& c, std::shared_ptr<ChatProvider> chat) {
    PlannerConfig pc;
    pc.provider = std::move(chat);
    pc.max_steps = c.max_steps;
    pc.retry_limit = c.retry_limit;
    pc.rule = c.rule;
    pc.seed = c.seed;
    return pc;
}

ToolboxConfig toolbox_config(const RunConfig& c) {
    ToolboxConfig tc;
    tc.default_model = c.model;
    tc.n_images = c.images_per_prompt(10);
    tc.generate.concurrency = c.concurrency;
    return tc;
}

std::string summary_line(const StereotypeReport& r) {
    std::ostringstream s;
    s << to_string(r.verdict) << ": " << r.intent.model << " on (\"" << r.pair.prompt << "\", "
      << r.pair.subgroup.display_name() << "), score " << Json(r.score.value).dump() << ", majority "
      << label_display(r.score.majority) << ", n=" << r.score.n_total;
    return s.str();
}

std::vector<std::string> read_queries(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Config, "cannot open query file " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        out.push_back(line);
    }
    if (out.empty()) throw Error(ErrorCode::Config, "query file " + path.string() + " holds no queries");
    return out;
}

// ---------------------------------------------------------------------------
// Commands

struct DetectArgs {
    std::string query;
    std::string queries;
};

int cmd_detect(const RunConfig& c, const DetectArgs& a, Io& io) {
    if (a.query.empty() == a.queries.empty()) throw Error(ErrorCode::Config, "detect needs exactly one of --query or --queries");
    Json args = Json::object();
    if (!a.query.empty()) args["query"] = a.query;
    if (!a.queries.empty()) args["queries"] = a.queries;
    write_manifest(c, "detect", args);

    auto b = make_backends(c);
    LiveToolbox toolbox(b.chat, b.store, b.images, b.classifier, toolbox_config(c));
    const auto pc = planner_config(c, b.chat);

    if (!a.query.empty()) {
        const auto report = run_trajectory(a.query, pc, toolbox);
        write_text(c.out / "report.json", to_json(report).dump(2) + "\n");
        write_text(c.out / "trajectory.log", trajectory_log(report.trajectory));
        write_text(c.out / "trajectory.json", trajectory_json(report.trajectory).dump(2) + "\n");
        io.out << summary_line(report) << "\n";
        return kExitOk;
    }

    const auto queries = read_queries(a.queries);
    const auto outcomes = run_task_batch(queries, pc, toolbox, BatchOptions{c.concurrency, c.out});
    std::size_t failed = 0;
    for (const auto& o : outcomes) {
        if (o.report) {
            io.out << o.index + 1 << ". " << summary_line(*o.report) << "\n";
        } else {
            ++failed;
            io.out << o.index + 1 << ". error: " << o.message << "\n";
        }
    }
    if (b.recording) {
        const auto reports = successful_reports(outcomes);
        if (!reports.empty()) {
            std::ofstream csv(c.out / "oracle_annotations.csv", std::ios::binary | std::ios::trunc);
            write_annotations(csv, oracle_annotations(reports, *b.recording));
        }
    }
    io.out << outcomes.size() - failed << " of " << outcomes.size() << " queries produced a report\n";
    return failed == 0 ? kExitOk : kExitPipeline;
}

struct BuildArgs {
    std::vector<std::string> corpora;  // NAME=PATH
    std::string adapters;
    double failure_cap = 0.2;
    bool include_non_toxic = false;
};

int cmd_build_dataset(const RunConfig& c, const BuildArgs& a, Io& io) {
    std::vector<std::pair<Corpus, fs::path>> inputs;
    if (a.corpora.empty()) {
        const fs::path dir = fs::path(STEREO_DATA_DIR) / "corpora";
        inputs = {{Corpus::SBIC, dir / "sbic.csv"},
                  {Corpus::HateExplain, dir / "hateexplain.jsonl"},
                  {Corpus::DYNAHATE, dir / "dynahate.csv"},
                  {Corpus::IHC, dir / "ihc.tsv"},
                  {Corpus::SMTD, dir / "smtd.csv"}};
    }
    for (const auto& spec : a.corpora) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::Config, "--corpus expects NAME=PATH, got '" + spec + "'");
        try {
            inputs.emplace_back(parse_corpus(spec.substr(0, eq)), spec.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(ErrorCode::Config, e.what());
        }
    }
    std::map<Corpus, AdapterConfig> adapters;
    for (auto corpus : kAllCorpora) adapters[corpus] = default_adapter(corpus);
    if (!a.adapters.empty()) adapters = load_adapter_configs(a.adapters);

    Json args = Json::object();
    Json listed = Json::array();
    for (const auto& [corpus, path] : inputs) listed.push_back(std::string(to_string(corpus)) + "=" + path.string());
    args["corpora"] = listed;
    if (!a.adapters.empty()) args["adapters"] = a.adapters;
    args["failure_cap"] = a.failure_cap;
    args["include_non_toxic"] = a.include_non_toxic;
    write_manifest(c, "build-dataset", args);

    std::vector<CorpusRecord> records;
    for (const auto& [corpus, path] : inputs) {
        auto result = ingest(corpus, path, adapters.at(corpus));
        for (const auto& d : result.diagnostics) {
            io.err << path.string() << ":" << d.line << ": skipped: " << d.reason << "\n";
        }
        io.out << to_string(corpus) << ": " << result.records.size() << " records, " << result.diagnostics.size()
               << " skipped\n";
        std::move(result.records.begin(), result.records.end(), std::back_inserter(records));
    }

    auto b = make_backends(c);
    ExtractOptions options;
    options.concurrency = c.concurrency;
    options.failure_cap = a.failure_cap;
    options.include_non_toxic = a.include_non_toxic;
    const auto result = extract_pairs(records, *b.chat, options);
    for (const auto& f : result.failures) io.err << f.source << ": " << f.error << "\n";
    persist(result.store, c.out / "spig.jsonl");
    io.out << "extracted " << result.store.size() << " pairs from " << result.attempted << " records ("
           << result.no_stereotype << " without a stereotype, " << result.skipped_non_toxic << " non-toxic skipped, "
           << result.failures.size() << " failed)\n";
    if (!result.store.empty()) io.out << render_stats(stats(result.store));
    return kExitOk;
}

int cmd_stats(const RunConfig& c, bool json, bool out_given, Io& io) {
    const auto store = load_store_for(c);
    const auto s = stats(*store);
    if (out_given) write_manifest(c, "stats", Json{{"json", json}}, Json{{"store_pairs", s.total_pairs}});
    if (json) {
        io.out << to_json(s).dump(2) << "\n";
    } else {
        io.out << render_stats(s);
    }
    return kExitOk;
}

int cmd_sample(const RunConfig& c, double fraction, Io& io) {
    const auto store = load_store_for(c);
    const auto sample = stratified_sample(*store, fraction, static_cast<std::uint64_t>(c.seed));
    write_manifest(c, "sample", Json{{"fraction", fraction}}, Json{{"store_pairs", store->size()}});
    InstructionStore out;
    for (const auto& p : sample) out.add(p);
    persist(out, c.out / "sample.jsonl");
    io.out << "sampled " << sample.size() << " of " << store->size() << " pairs\n" << render_stats(stats(out));
    return kExitOk;
}

int cmd_benchmark(const RunConfig& c, const std::vector<std::string>& models_in, Io& io) {
    auto models = models_in;
    if (models.empty()) models = known_models();
    const auto n = c.images_per_prompt(20);
    write_manifest(c, "benchmark", Json{{"models", models}, {"n", n}});

    auto b = make_backends(c);
    if (b.store->empty()) throw Error(ErrorCode::EmptyStore, "benchmark needs a non-empty store");
    auto scored = *b.store;
    const auto pairs = b.store->pairs();
    Json summary = Json::array();
    for (const auto& model : models) {
        std::vector<std::pair<InstructionPair, StereotypeScore>> scores(pairs.size(),
                                                                         {pairs.front().pair, StereotypeScore{}});
        std::vector<std::string> errors(pairs.size());
        const int threads = static_cast<int>(std::clamp<std::size_t>(c.concurrency, 1, 64));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto& pair = pairs[i].pair;
            try {
                const auto seed = query_seed(c.seed, fnv1a64(model + "\x1f" + dedupe_key(pair)));
                const auto images = generate_batch(*b.images, model, prompt_optimize(pair), n, seed,
                                                   GenerateOptions{0, 2, 1});
                scores[i] = {pair, score_calculate(classify_batch(*b.classifier, images, pair.dimension()))};
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
        std::size_t stereotyped = 0;
        std::size_t failed = 0;
        double total = 0.0;
        std::vector<std::pair<InstructionPair, StereotypeScore>> ok;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (!errors[i].empty()) {
                ++failed;
                io.err << model << ": " << pairs[i].pair.prompt << ": " << errors[i] << "\n";
                continue;
            }
            ok.push_back(scores[i]);
            total += scores[i].second.value;
            if (decide_verdict(scores[i].second, scores[i].first.dimension(), c.rule) == Verdict::Stereotyped) ++stereotyped;
        }
        record_benchmark_scores(scored, canonical_model_id(model), ok);
        const double mean = ok.empty() ? 0.0 : total / static_cast<double>(ok.size());
        summary.push_back(Json{{"model", canonical_model_id(model)},
                               {"pairs", ok.size()},
                               {"failed", failed},
                               {"mean_score", mean},
                               {"stereotyped", stereotyped}});
        char line[256];
        std::snprintf(line, sizeof line, "%-18s pairs %5zu  mean score %.3f  stereotyped %5zu (%.1f%%)\n",
                      canonical_model_id(model).c_str(), ok.size(), mean, stereotyped,
                      ok.empty() ? 0.0 : 100.0 * static_cast<double>(stereotyped) / static_cast<double>(ok.size()));
        io.out << line;
    }
    persist(scored, c.out / "spig_scored.jsonl");
    write_text(c.out / "benchmark.json", summary.dump(2) + "\n");
    return kExitOk;
}

std::vector<StereotypeReport> load_reports(const fs::path& where) {
    std::vector<fs::path> files;
    if (fs::is_regular_file(where)) {
        files.push_back(where);
    } else if (fs::is_directory(where / "reports")) {
        for (const auto& e : fs::directory_iterator(where / "reports")) {
            if (e.path().extension() == ".json") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
    } else if (fs::is_regular_file(where / "report.json")) {
        files.push_back(where / "report.json");
    }
    if (files.empty()) throw Error(ErrorCode::IoError, "no reports found under " + where.string());
    std::vector<StereotypeReport> out;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        try {
            out.push_back(report_from_json(Json::parse(in)));
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::MalformedFile, f.string() + ": " + e.what());
        }
    }
    return out;
}

struct EvaluateArgs {
    std::string reports;
    std::string annotations;
    bool synthetic = false;
};

int cmd_evaluate(const RunConfig& c, const EvaluateArgs& a, Io& io) {
    if (a.synthetic) {
        write_manifest(c, "evaluate", Json{{"synthetic", true}});
        BenchmarkConfig bc;
        bc.n_images = c.images_per_prompt(20);
        bc.seed = c.seed;
        bc.rule = c.rule;
        bc.concurrency = c.concurrency;
        bc.out_dir = c.out;
        const auto run = run_synthetic_benchmark(bc, load_store_for(c), synthetic_classifier(c.classifier, c.seed));
        io.out << render_table(run.agreement);
        return kExitOk;
    }
    if (a.reports.empty() || a.annotations.empty()) {
        throw Error(ErrorCode::Config, "evaluate needs --reports and --annotations, or --synthetic");
    }
    write_manifest(c, "evaluate", Json{{"reports", a.reports}, {"annotations", a.annotations}});
    const auto reports = load_reports(a.reports);
    const auto human = aggregate_annotations(load_annotations(a.annotations));
    const auto agreement = compare(reports, human, c.rule);
    write_text(c.out / "agreement.json", to_json(agreement).dump(2) + "\n");
    const auto table = render_table(agreement);
    write_text(c.out / "agreement.txt", table);
    io.out << table;
    return kExitOk;
}

int cmd_make_fixture(const RunConfig& c, const std::string& kind, Io& io) {
    fs::create_directories(c.out);
    if (kind == "bundled") {
        const auto store = make_fixture(bundled_fixture_manifest());
        persist(store, c.out / "spig_fixture.jsonl");
        io.out << "wrote " << store.size() << " pairs\n";
    } else if (kind == "full") {
        save_fixture_manifest(full_fixture_manifest(), c.out / "spig_full_manifest.json");
        io.out << "wrote fixture manifest\n";
    } else {
        throw Error(ErrorCode::Config, "--kind must be 'bundled' or 'full'");
    }
    return kExitOk;
}

void add_common(CLI::App* sub, Flags& f) {
    auto set = [&f](const std::string& key) { return [&f, key](const std::string& v) { f.values[key] = v; }; };
    sub->add_option("--config", f.config_path, "INI settings file (also STEREO_CONFIG)");
    sub->add_option("--from-manifest", f.from_manifest, "Replay the settings recorded in a manifest.json");
    sub->add_option_function<std::string>("--backend", set("backend"), "synthetic or live, for every backend role")
        ->multi_option_policy(CLI::MultiOptionPolicy::Throw);
    sub->add_option_function<std::string>("--chat-url", set("chat_url"), "Chat endpoint base URL");
    sub->add_option_function<std::string>("--generate-url", set("generate_url"), "Generation endpoint base URL");
    sub->add_option_function<std::string>("--classify-url", set("classify_url"), "Classifier endpoint base URL");
    sub->add_option_function<std::string>("--token", set("token"), "Bearer token for live endpoints");
    sub->add_option_function<std::string>("--store", set("store"), "Instruction store (JSONL or fixture manifest)");
    sub->add_option_function<std::string>("-n,--n", set("n"), "Images per prompt");
    sub->add_option_function<std::string>("--seed", set("seed"), "Base seed");
    sub->add_option_function<std::string>("--rule", set("rule"), "threshold:<t> or binomial:<alpha>");
    sub->add_option_function<std::string>("--out", set("out"), "Output directory");
    sub->add_option_function<std::string>("--model", set("model"), "Default target model");
    sub->add_option_function<std::string>("--classifier", set("classifier"), "Synthetic classifier: oracle or noisy:<diag>");
    sub->add_option_function<std::string>("--concurrency", set("concurrency"), "Worker bound");
    sub->add_flag_function("--save-images", [&f](std::int64_t) { f.values["save_images"] = "true"; },
                           "Write synthetic images as PNG files");
}

RunConfig load_config(const Flags& f, Manifest* replay, const Io& io) {
    Settings layered;
    if (!f.from_manifest.empty()) {
        auto m = read_manifest(f.from_manifest);
        layered = m.config;
        if (replay) *replay = std::move(m);
    }
    std::string config_path = f.config_path;
    if (config_path.empty() && io.env) {
        if (const char* p = io.env("STEREO_CONFIG"); p && *p) config_path = p;
    }
    if (!config_path.empty()) layered = overlay(layered, read_ini(config_path));
    layered = overlay(layered, read_env(io.env));
    layered = overlay(layered, f.values);
    return resolve(layered);
}

}  // namespace

int run(int argc, const char* const* argv, Io io) {
    CLI::App app{"Stereotype audit engine for text-to-image models", "stereo"};
    app.require_subcommand(1);
    app.set_version_flag("--version", STEREO_VERSION);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");

    Flags flags;
    DetectArgs detect_args;
    auto* detect = app.add_subcommand("detect", "Audit one query (or a file of queries)");
    add_common(detect, flags);
    detect->add_option("--query,-q", detect_args.query, "Detection request in plain language");
    detect->add_option("--queries", detect_args.queries, "File with one query per line");

    BuildArgs build_args;
    auto* build = app.add_subcommand("build-dataset", "Extract instruction pairs from toxicity corpora");
    add_common(build, flags);
    build->add_option("--corpus", build_args.corpora, "NAME=PATH, repeatable; defaults to the bundled fixtures");
    build->add_option("--adapters", build_args.adapters, "INI file with per-corpus column maps");
    build->add_option("--failure-cap", build_args.failure_cap, "Tolerated fraction of failed extractions");
    build->add_flag("--include-non-toxic", build_args.include_non_toxic, "Keep rows the corpus marks non-toxic");

    bool stats_json = false;
    auto* stats_cmd = app.add_subcommand("stats", "Dimension and subgroup distribution of a store");
    add_common(stats_cmd, flags);
    stats_cmd->add_flag("--json", stats_json, "Print JSON");

    double fraction = 0.1;
    auto* sample = app.add_subcommand("sample", "Stratified sample of a store for annotation");
    add_common(sample, flags);
    sample->add_option("--fraction", fraction, "Share of each stratum")->check(CLI::Range(0.0, 1.0));

    std::vector<std::string> models;
    auto* bench = app.add_subcommand("benchmark", "Score every stored pair against target models");
    add_common(bench, flags);
    bench->add_option("--models", models, "Target models")->delimiter(',');

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Compare agent reports with human annotations");
    add_common(evaluate, flags);
    evaluate->add_option("--reports", eval_args.reports, "Run directory or report file");
    evaluate->add_option("--annotations", eval_args.annotations, "CSV image_ref,annotator_id,label");
    evaluate->add_flag("--synthetic", eval_args.synthetic, "Run the bundled 120-query synthetic benchmark");

    std::string kind = "bundled";
    auto* fixture = app.add_subcommand("make-fixture", "Write the synthetic instruction-store fixture");
    add_common(fixture, flags);
    fixture->add_option("--kind", kind, "bundled or full");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, io.out, io.err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

    const auto* active = app.get_subcommands().front();
    try {
        Manifest replay;
        const auto config = load_config(flags, &replay, io);
        if (active == detect) {
            if (detect_args.query.empty() && detect_args.queries.empty()) {
                detect_args.query = replay.args.value("query", std::string{});
                detect_args.queries = replay.args.value("queries", std::string{});
            }
            return cmd_detect(config, detect_args, io);
        }
        if (active == build) return cmd_build_dataset(config, build_args, io);
        if (active == stats_cmd) return cmd_stats(config, stats_json, flags.values.count("out") > 0, io);
        if (active == sample) return cmd_sample(config, fraction, io);
        if (active == bench) return cmd_benchmark(config, models, io);
        if (active == evaluate) return cmd_evaluate(config, eval_args, io);
        return cmd_make_fixture(config, kind, io);
    } catch (const Error& e) {
        io.err << "error: " << e.what() << "\n";
        if (e.cause()) io.err << "cause: " << to_string(*e.cause()) << "\n";
        return e.code() == ErrorCode::Config ? kExitConfig : kExitPipeline;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return kExitPipeline;
    }
}

}  // namespace stereo::cli
