#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "acsa/datasets.hpp"
#include "acsa/errors.hpp"
#include "acsa/io.hpp"
#include "acsa/mock_backend.hpp"
#include "acsa/reports.hpp"
#include "acsa/runner.hpp"

namespace {

using nlohmann::json;

std::string known_datasets() {
    std::string out;
    for (const acsa::DatasetInfo& info : acsa::dataset_registry()) {
        if (!out.empty()) out += ", ";
        out += info.name;
    }
    return out;
}

acsa::Split parse_split_arg(const std::string& s) {
    auto split = acsa::parse_split(s);
    if (!split) throw acsa::ConfigError("unknown split \"" + s + "\" (train, val, test)");
    return *split;
}

struct IngestArgs {
    std::string dataset;
    std::vector<std::string> inputs;
    std::string default_split = "test";
    std::string out;
};

void cmd_ingest(const IngestArgs& args) {
    const acsa::DatasetInfo* info = acsa::find_dataset(args.dataset);
    if (!info)
        throw acsa::ConfigError("unknown dataset \"" + args.dataset + "\" (known: " +
                                known_datasets() + ")");
    std::vector<std::pair<acsa::Split, std::string>> inputs;
    for (const std::string& input : args.inputs) {
        const std::size_t eq = input.find('=');
        if (eq != std::string::npos && acsa::parse_split(input.substr(0, eq)))
            inputs.emplace_back(*acsa::parse_split(input.substr(0, eq)), input.substr(eq + 1));
        else
            inputs.emplace_back(parse_split_arg(args.default_split), input);
    }
    acsa::IngestOutcome outcome = acsa::ingest_dataset(*info, inputs);
    acsa::write_corpus_jsonl(outcome.corpus, args.out);
    acsa::write_manifest(outcome.manifest, args.out + ".manifest.json");

    std::size_t train = 0, val = 0, test = 0;
    for (const acsa::Instance& inst : outcome.corpus.instances) {
        if (inst.split == acsa::Split::train) ++train;
        else if (inst.split == acsa::Split::val) ++val;
        else ++test;
    }
    std::cout << "dataset " << info->name << ": kept " << outcome.stats.kept << " instances"
              << " (train " << train << ", val " << val << ", test " << test << ")\n"
              << "dropped: " << outcome.stats.dropped_conflicts << " conflicting, "
              << outcome.stats.dropped_empty << " empty-gold, "
              << outcome.stats.dropped_bad_polarity << " bad-polarity; skipped records: "
              << outcome.stats.skipped_records << "\n"
              << "categories: " << outcome.manifest.schema.labels.size() << "\n"
              << "corpus: " << args.out << "\nmanifest: " << args.out << ".manifest.json\n";
}

struct RunArgs {
    std::string corpus;
    std::string manifest;
    std::string backend;
    std::string out;
    std::string mode = "enumerated";
    std::string orders = "all";
    std::string model;
    std::string split = "test";
    int concurrency = 4;
    int max_tokens = 1024;
    int fewshot_k = 5;
    std::uint64_t fewshot_seed = 0;
    std::optional<std::uint64_t> shuffle_seed;
    double min_ratio = 0.0;
};

std::shared_ptr<acsa::Backend> make_backend(const std::string& config_path, std::string& model) {
    std::ifstream in(config_path);
    if (!in) throw acsa::ConfigError("cannot open backend config " + config_path);
    json config;
    try {
        config = json::parse(in);
    } catch (const json::exception& e) {
        throw acsa::ConfigError("backend config " + config_path + ": " + e.what());
    }
    const std::string type = config.value("type", std::string{});
    if (model.empty()) model = config.value("model", std::string{});
    if (type == "mock") {
        if (!config.contains("script"))
            throw acsa::ConfigError("backend config " + config_path + " needs a script path");
        if (model.empty()) model = "mock";
        std::filesystem::path script = config["script"].get<std::string>();
        if (script.is_relative())
            script = std::filesystem::path(config_path).parent_path() / script;
        return acsa::MockBackend::from_script_file(script.string());
    }
    if (type == "openai") {
        acsa::HttpBackendConfig http;
        http.base_url = acsa::interpolate_env(config.value("base_url", std::string{}));
        http.api_key = acsa::interpolate_env(config.value("api_key", std::string{}));
        http.path = config.value("path", http.path);
        http.timeout_seconds = config.value("timeout_seconds", http.timeout_seconds);
        if (http.base_url.empty())
            throw acsa::ConfigError("backend config " + config_path + " needs base_url");
        if (model.empty())
            throw acsa::ConfigError("no model id: pass --model or set \"model\" in " +
                                    config_path);
        return acsa::make_http_backend(std::move(http));
    }
    throw acsa::ConfigError("backend config " + config_path +
                            ": type must be \"mock\" or \"openai\"");
}

void cmd_run(const RunArgs& args) {
    acsa::Corpus corpus = acsa::read_corpus_jsonl(args.corpus);
    const std::string manifest_path =
        args.manifest.empty() ? args.corpus + ".manifest.json" : args.manifest;
    acsa::DatasetManifest manifest = acsa::read_manifest(manifest_path);

    acsa::RunConfig config;
    config.corpus_path = args.corpus;
    config.rundir = args.out;
    auto mode = acsa::parse_prompt_mode(args.mode);
    if (!mode)
        throw acsa::ConfigError("unknown mode \"" + args.mode +
                                "\" (enumerated, multihop, fewshot)");
    config.mode = *mode;
    if (args.orders != "all") {
        std::string rest = args.orders;
        while (!rest.empty()) {
            const std::size_t comma = rest.find(',');
            const std::string code = rest.substr(0, comma);
            auto order = acsa::ElementOrder::from_code(code);
            if (!order) throw acsa::ConfigError("unknown agent order \"" + code + "\"");
            config.orders.push_back(*order);
            if (comma == std::string::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (config.orders.empty()) throw acsa::ConfigError("no agent orders given");
    }
    config.split = parse_split_arg(args.split);
    config.concurrency = args.concurrency;
    config.decode.max_tokens = args.max_tokens;
    config.fewshot_k = args.fewshot_k;
    config.fewshot_seed = args.fewshot_seed;
    config.shuffle_seed = args.shuffle_seed;
    config.min_ratio = args.min_ratio;

    std::string model = args.model;
    std::shared_ptr<acsa::Backend> backend = make_backend(args.backend, model);
    config.model = model;

    acsa::RunSummary summary = acsa::execute_run(config, backend, manifest, corpus);
    std::cout << "run complete: " << summary.instances << " instances x " << summary.agents
              << " agents, " << summary.requests << " generations (" << summary.cache_hits
              << " cached, " << summary.backend_calls << " live)\n"
              << "rundir: " << args.out << "\n";
}

struct AggregateArgs {
    std::string rundir;
    std::string technique = "highest_prob_list";
    std::string alpha = "1";
    std::string embedder = "hash";
    std::uint64_t seed = 0;
    bool resolve_conflicts = false;
    std::string out;
};

void cmd_aggregate(const AggregateArgs& args) {
    auto technique = acsa::parse_technique(args.technique);
    if (!technique) throw acsa::ConfigError("unknown technique \"" + args.technique + "\"");
    acsa::RunData run = acsa::load_run(args.rundir);
    acsa::AggregateConfig config;
    config.technique = *technique;
    config.alpha = acsa::AlphaPolicy::from_string(args.alpha);
    config.embedder_spec = args.embedder;
    config.seed = args.seed;
    config.resolve_conflicts = args.resolve_conflicts;
    acsa::PredictionSet preds = acsa::aggregate_run(run, config);
    const std::string out = args.out.empty()
                                ? (std::filesystem::path(args.rundir) / "predictions" /
                                   (args.technique + ".jsonl"))
                                      .string()
                                : args.out;
    acsa::write_predictions(preds, out);
    std::cout << "technique " << preds.technique << ": " << preds.ids.size()
              << " predictions";
    if (preds.agent) std::cout << " (winning agent " << *preds.agent << ")";
    if (preds.degraded_instances)
        std::cout << " (" << preds.degraded_instances << " degraded to pooled ranking)";
    std::cout << "\npredictions: " << out << "\n";
}

struct EvaluateArgs {
    std::string predictions;
    std::string corpus;
    std::string rundir;
    std::string grid;
    std::string out;
};

void cmd_evaluate(const EvaluateArgs& args) {
    if (!args.grid.empty()) {
        acsa::ComparisonTable table = acsa::render_grid_file(args.grid, args.out);
        std::cout << acsa::render_table_text(table);
        return;
    }
    if (args.predictions.empty() || args.corpus.empty())
        throw acsa::ConfigError("evaluate needs --predictions and --corpus (or --grid)");
    acsa::PredictionSet preds = acsa::read_predictions(args.predictions);
    acsa::Corpus corpus = acsa::read_corpus_jsonl(args.corpus);
    std::optional<std::string> rundir;
    if (!args.rundir.empty()) rundir = args.rundir;
    acsa::evaluate_predictions(preds, corpus, rundir, args.out);
    std::ifstream summary(std::filesystem::path(args.out) / "summary.txt");
    std::cout << summary.rdbuf();
}

struct AnalyzeArgs {
    std::string rundir;
    std::string corpus;
    std::string technique = "highest_prob_list";
    std::string out;
};

void cmd_analyze(const AnalyzeArgs& args) {
    auto technique = acsa::parse_technique(args.technique);
    if (!technique) throw acsa::ConfigError("unknown technique \"" + args.technique + "\"");
    acsa::RunData run = acsa::load_run(args.rundir);
    acsa::Corpus corpus = acsa::read_corpus_jsonl(args.corpus);
    const std::string out =
        args.out.empty() ? (std::filesystem::path(args.rundir) / "analysis").string() : args.out;
    acsa::AnalysisResult result = acsa::analyze_run(run, corpus, *technique, out);
    auto show = [](const std::optional<double>& rho) {
        return rho ? std::to_string(*rho) : std::string("undefined");
    };
    std::cout << "technique " << result.technique << " over "
              << result.correlation.n_instances << " instances\n"
              << "rho(mean confidence, F1) = " << show(result.correlation.rho_mean_confidence)
              << "\nrho(confidence variance, F1) = " << show(result.correlation.rho_variance)
              << "\nanalysis: " << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Aspect-category sentiment pipeline: permuted reasoning agents over "
                 "token-probability confidence"};
    app.require_subcommand(1);

    IngestArgs ingest;
    CLI::App* ingest_cmd = app.add_subcommand("ingest", "Normalize a dataset into corpus JSONL");
    ingest_cmd->add_option("--dataset", ingest.dataset, "Dataset name (" + known_datasets() + ")")
        ->required();
    ingest_cmd
        ->add_option("--input", ingest.inputs,
                     "Input file, optionally prefixed split= (repeatable)")
        ->required();
    ingest_cmd->add_option("--split", ingest.default_split,
                           "Split for inputs without a prefix (default test)");
    ingest_cmd->add_option("--out", ingest.out, "Corpus JSONL output path")->required();

    RunArgs run;
    CLI::App* run_cmd = app.add_subcommand("run", "Execute the agents over a corpus");
    run_cmd->add_option("--corpus", run.corpus, "Corpus JSONL")->required();
    run_cmd->add_option("--manifest", run.manifest,
                        "Dataset manifest (default <corpus>.manifest.json)");
    run_cmd->add_option("--backend", run.backend, "Backend config JSON")->required();
    run_cmd->add_option("--out", run.out, "Run directory")->required();
    run_cmd->add_option("--mode", run.mode, "enumerated | multihop | fewshot");
    run_cmd->add_option("--orders", run.orders, "all or comma-separated codes, e.g. ACO,OCA");
    run_cmd->add_option("--model", run.model, "Model id (overrides backend config)");
    run_cmd->add_option("--split", run.split, "Corpus split to run (default test)");
    run_cmd->add_option("--concurrency", run.concurrency, "Parallel generations (default 4)");
    run_cmd->add_option("--max-tokens", run.max_tokens, "Generation budget (default 1024)");
    run_cmd->add_option("--fewshot-k", run.fewshot_k, "Examples per fewshot prompt (1-10)");
    run_cmd->add_option("--fewshot-seed", run.fewshot_seed, "Example sampling seed");
    auto* shuffle_opt = run_cmd->add_option("--shuffle-categories", run.shuffle_seed,
                                            "Shuffle schema render order with this seed");
    run_cmd->add_option("--min-ratio", run.min_ratio,
                        "Category-mapping similarity floor (default 0)");

    AggregateArgs aggregate;
    CLI::App* aggregate_cmd =
        app.add_subcommand("aggregate", "Combine agent outputs into predictions");
    aggregate_cmd->add_option("--rundir", aggregate.rundir, "Run directory")->required();
    aggregate_cmd->add_option("--technique", aggregate.technique,
                              "highest_prob_list | most_common_list | highest_prob_pairs | "
                              "clustered_pairs | most_confident_agent | joined | "
                              "lowest_prob_list");
    aggregate_cmd->add_option("--alpha", aggregate.alpha, "Pair-count policy: [0,1], mean, max");
    aggregate_cmd->add_option("--embedder", aggregate.embedder,
                              "hash, hash:<dim>, or embedder config JSON");
    aggregate_cmd->add_option("--seed", aggregate.seed, "Clustering seed");
    aggregate_cmd->add_flag("--resolve-conflicts", aggregate.resolve_conflicts,
                            "Keep only the best polarity per category");
    aggregate_cmd->add_option("--out", aggregate.out,
                              "Predictions path (default <rundir>/predictions/<technique>.jsonl)");

    EvaluateArgs evaluate;
    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold");
    evaluate_cmd->add_option("--predictions", evaluate.predictions, "Predictions JSONL");
    evaluate_cmd->add_option("--corpus", evaluate.corpus, "Corpus JSONL");
    evaluate_cmd->add_option("--rundir", evaluate.rundir,
                             "Run directory for per-agent scores and pair counts");
    evaluate_cmd->add_option("--grid", evaluate.grid,
                             "Render a comparison grid JSON instead of scoring");
    evaluate_cmd->add_option("--out", evaluate.out, "Report directory")->required();

    AnalyzeArgs analyze;
    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "Confidence correlation analysis over a run");
    analyze_cmd->add_option("--rundir", analyze.rundir, "Run directory")->required();
    analyze_cmd->add_option("--corpus", analyze.corpus, "Corpus JSONL")->required();
    analyze_cmd->add_option("--technique", analyze.technique,
                            "Designated technique for per-instance F1");
    analyze_cmd->add_option("--out", analyze.out, "Analysis directory (default <rundir>/analysis)");

    try {
        app.parse(argc, argv);
        if (shuffle_opt->count() == 0) run.shuffle_seed.reset();
        if (ingest_cmd->parsed()) cmd_ingest(ingest);
        if (run_cmd->parsed()) cmd_run(run);
        if (aggregate_cmd->parsed()) cmd_aggregate(aggregate);
        if (evaluate_cmd->parsed()) cmd_evaluate(evaluate);
        if (analyze_cmd->parsed()) cmd_analyze(analyze);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const acsa::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const acsa::BackendError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const acsa::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const acsa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
