#include "acsa/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <random>
#include <thread>

#include "acsa/confidence.hpp"
#include "acsa/parse.hpp"

namespace acsa {

namespace {

using nlohmann::json;

std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hop_message(std::size_t hop, std::size_t total, const char* what) {
    return "multihop hop " + std::to_string(hop + 1) + "/" + std::to_string(total) + ": " + what;
}

// What one (instance, agent) job leaves behind for the record file.
struct RunCell {
    ScoredList scored;
    bool empty_parse = false;
    int dropped_tuples = 0;
    int dropped_low_ratio = 0;
    std::string text;
    std::vector<TokenProb> tokens;
    std::vector<Message> transcript;  // multihop only
    std::vector<ParsedPair> parsed_pairs;
};

std::vector<FewshotExample> pick_examples(const Corpus& corpus, int k, std::uint64_t seed) {
    std::vector<const Instance*> train;
    for (const Instance& inst : corpus.instances)
        if (inst.split == Split::train) train.push_back(&inst);
    if (static_cast<int>(train.size()) < k)
        throw ConfigError("fewshot needs " + std::to_string(k) + " train instances, corpus has " +
                          std::to_string(train.size()));
    // Partial Fisher-Yates so the draw is portable across standard
    // library implementations.
    std::vector<std::size_t> idx(train.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::vector<FewshotExample> out;
    for (int i = 0; i < k; ++i) {
        std::size_t j = i + rng() % (idx.size() - i);
        std::swap(idx[i], idx[j]);
        const Instance* inst = train[idx[i]];
        out.push_back({inst->text, inst->gold});
    }
    return out;
}

json tokens_to_json(const std::vector<TokenProb>& tokens) {
    json out = json::array();
    for (const TokenProb& t : tokens) out.push_back({t.text, t.logprob});
    return out;
}

json record_to_json(const RunCell& cell, const std::string& instance_id,
                    const std::string& agent, PromptMode mode) {
    json pairs = json::array();
    for (std::size_t i = 0; i < cell.scored.pairs.size(); ++i) {
        const ScoredPair& sp = cell.scored.pairs[i];
        const ParsedPair& pp = cell.parsed_pairs[i];
        pairs.push_back({{"category", sp.pair.category},
                         {"polarity", std::string(to_string(sp.pair.polarity))},
                         {"confidence", sp.confidence},
                         {"raw_category", pp.raw_category},
                         {"raw_polarity", pp.raw_polarity},
                         {"match_ratio", pp.match_ratio}});
    }
    json record = {{"instance_id", instance_id},
                   {"agent", agent},
                   {"mode", std::string(to_string(mode))},
                   {"text", cell.text},
                   {"tokens", tokens_to_json(cell.tokens)},
                   {"empty_parse", cell.empty_parse},
                   {"dropped_tuples", cell.dropped_tuples},
                   {"dropped_low_ratio", cell.dropped_low_ratio},
                   {"pairs", std::move(pairs)},
                   {"list_confidence", cell.scored.list_confidence}};
    if (!cell.transcript.empty()) {
        json transcript = json::array();
        for (const Message& m : cell.transcript) transcript.push_back({m.role, m.content});
        record["transcript"] = std::move(transcript);
    }
    return record;
}

}  // namespace

std::vector<GenerationResponse> run_multihop_thread(Client& client, const PromptBundle& bundle,
                                                    const std::string& model,
                                                    const DecodeOptions& decode) {
    if (bundle.mode != PromptMode::multihop)
        throw ConfigError("run_multihop_thread needs a multihop bundle");
    std::vector<GenerationResponse> out;
    GenerationRequest req{model, {{"system", bundle.system}}, decode};
    const std::size_t total = bundle.user_turns.size();
    for (std::size_t hop = 0; hop < total; ++hop) {
        req.messages.push_back({"user", bundle.user_turns[hop]});
        try {
            GenerationResponse resp = client.generate(req);
            req.messages.push_back({"assistant", resp.text});
            out.push_back(std::move(resp));
        } catch (const TransportError& e) {
            throw TransportError(hop_message(hop, total, e.what()));
        } catch (const CapabilityError& e) {
            throw CapabilityError(hop_message(hop, total, e.what()));
        } catch (const BackendError& e) {
            throw BackendError(hop_message(hop, total, e.what()));
        }
    }
    return out;
}

RunSummary execute_run(const RunConfig& config, std::shared_ptr<Backend> backend,
                       const DatasetManifest& manifest, const Corpus& corpus) {
    if (!backend) throw ConfigError("run needs a backend");
    if (config.rundir.empty()) throw ConfigError("run needs an output directory");
    if (config.concurrency < 1) throw ConfigError("concurrency must be at least 1");

    std::vector<ElementOrder> orders =
        config.orders.empty() ? all_element_orders() : config.orders;

    CategorySchema schema = manifest.schema;
    if (config.shuffle_seed) schema = shuffled_schema(schema, *config.shuffle_seed);

    std::vector<FewshotExample> examples;
    if (config.mode == PromptMode::fewshot) {
        if (config.fewshot_k < 1 || config.fewshot_k > 10)
            throw ConfigError("fewshot_k must be in [1, 10]");
        examples = pick_examples(corpus, config.fewshot_k, config.fewshot_seed);
    }

    std::vector<const Instance*> instances;
    for (const Instance& inst : corpus.instances)
        if (inst.split == config.split) instances.push_back(&inst);
    if (instances.empty())
        throw DataError("corpus has no instances in split " +
                        std::string(to_string(config.split)));

    namespace fs = std::filesystem;
    fs::create_directories(fs::path(config.rundir) / "records");

    json run_config = {{"dataset", corpus.dataset},
                       {"corpus", config.corpus_path},
                       {"mode", std::string(to_string(config.mode))},
                       {"model", config.model},
                       {"split", std::string(to_string(config.split))},
                       {"concurrency", config.concurrency},
                       {"min_ratio", config.min_ratio},
                       {"backend", backend->name()},
                       {"domain", manifest.domain},
                       {"schema", schema.labels},
                       {"decode",
                        {{"temperature", config.decode.temperature},
                         {"max_tokens", config.decode.max_tokens},
                         {"logprobs", config.decode.logprobs}}},
                       {"timestamp", utc_timestamp()}};
    json order_codes = json::array();
    for (const ElementOrder& order : orders) order_codes.push_back(order.code());
    run_config["orders"] = std::move(order_codes);
    if (config.mode == PromptMode::fewshot) {
        run_config["fewshot_k"] = config.fewshot_k;
        run_config["fewshot_seed"] = config.fewshot_seed;
    }
    if (config.shuffle_seed) run_config["shuffle_seed"] = *config.shuffle_seed;
    {
        std::ofstream out(fs::path(config.rundir) / "run.json");
        if (!out) throw DataError("cannot write run.json under " + config.rundir);
        out << run_config.dump(2) << '\n';
    }

    Client client(std::move(backend),
                  {(fs::path(config.rundir) / "cache.jsonl").string(), true, 5, 250});

    struct Job {
        std::size_t instance_idx;
        std::size_t order_idx;
    };
    std::vector<Job> jobs;
    jobs.reserve(instances.size() * orders.size());
    for (std::size_t o = 0; o < orders.size(); ++o)
        for (std::size_t i = 0; i < instances.size(); ++i) jobs.push_back({i, o});

    std::vector<std::vector<RunCell>> cells(instances.size(),
                                            std::vector<RunCell>(orders.size()));

    auto run_job = [&](const Job& job) {
        const Instance& inst = *instances[job.instance_idx];
        const ElementOrder& order = orders[job.order_idx];
        PromptBundle bundle;
        switch (config.mode) {
            case PromptMode::enumerated:
                bundle = build_enumerated(order, inst.text, schema, manifest.domain);
                break;
            case PromptMode::multihop:
                bundle = build_multihop(order, inst.text, schema, manifest.domain);
                break;
            case PromptMode::fewshot:
                bundle = build_fewshot(order, inst.text, schema, manifest.domain, examples);
                break;
        }

        RunCell cell;
        if (config.mode == PromptMode::multihop) {
            auto responses = run_multihop_thread(client, bundle, config.model, config.decode);
            cell.transcript.push_back({"system", bundle.system});
            for (std::size_t hop = 0; hop < responses.size(); ++hop) {
                cell.transcript.push_back({"user", bundle.user_turns[hop]});
                cell.transcript.push_back({"assistant", responses[hop].text});
            }
            cell.text = responses.back().text;
            cell.tokens = std::move(responses.back().tokens);
        } else {
            GenerationRequest req{config.model,
                                  {{"system", bundle.system}, {"user", bundle.user_turns[0]}},
                                  config.decode};
            GenerationResponse resp = client.generate(req);
            cell.text = resp.text;
            cell.tokens = std::move(resp.tokens);
        }

        auto parsed = parse_generation(cell.text, schema, config.min_ratio);
        if (parsed) {
            cell.scored = score_parsed_list(*parsed, cell.tokens, order.code());
            cell.parsed_pairs = std::move(parsed->pairs);
            cell.dropped_tuples = parsed->dropped_tuples;
            cell.dropped_low_ratio = parsed->dropped_low_ratio;
        } else {
            cell.empty_parse = true;
        }
        cells[job.instance_idx][job.order_idx] = std::move(cell);
    };

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        while (!failed.load()) {
            std::size_t at = next.fetch_add(1);
            if (at >= jobs.size()) return;
            try {
                run_job(jobs[at]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
            }
        }
    };
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.concurrency), jobs.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    for (std::size_t o = 0; o < orders.size(); ++o) {
        const std::string code = orders[o].code();
        std::ofstream out(fs::path(config.rundir) / "records" / (code + ".jsonl"));
        if (!out) throw DataError("cannot write records for agent " + code);
        for (std::size_t i = 0; i < instances.size(); ++i)
            out << record_to_json(cells[i][o], instances[i]->id, code, config.mode).dump()
                << '\n';
    }

    RunSummary summary;
    summary.instances = instances.size();
    summary.agents = orders.size();
    summary.cache_hits = client.cache_hits();
    summary.backend_calls = client.backend_calls();
    summary.requests = summary.cache_hits + summary.backend_calls;
    return summary;
}

RunData load_run(const std::string& rundir) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(rundir) / "run.json");
    if (!in) throw DataError("cannot open run.json under " + rundir);
    json run_config;
    try {
        run_config = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(rundir + "/run.json: " + e.what());
    }

    RunData run;
    try {
        run.dataset = run_config.at("dataset").get<std::string>();
        run.model = run_config.at("model").get<std::string>();
        run.corpus_path = run_config.value("corpus", std::string{});
        const std::string mode = run_config.at("mode").get<std::string>();
        auto parsed_mode = parse_prompt_mode(mode);
        if (!parsed_mode) throw DataError(rundir + "/run.json: unknown mode \"" + mode + "\"");
        run.mode = *parsed_mode;
        run.agents = run_config.at("orders").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw DataError(rundir + "/run.json: " + e.what());
    }

    for (std::size_t a = 0; a < run.agents.size(); ++a) {
        const std::string& code = run.agents[a];
        const std::string path = (fs::path(rundir) / "records" / (code + ".jsonl")).string();
        std::ifstream records(path);
        if (!records) throw DataError("cannot open " + path);
        std::string line;
        std::size_t line_no = 0;
        std::size_t row = 0;
        while (std::getline(records, line)) {
            ++line_no;
            if (line.empty()) continue;
            const std::string where = path + " line " + std::to_string(line_no);
            json record;
            try {
                record = json::parse(line);
            } catch (const json::exception& e) {
                throw DataError(where + ": " + e.what());
            }
            try {
                const std::string id = record.at("instance_id").get<std::string>();
                if (a == 0) {
                    run.instance_ids.push_back(id);
                    run.lists.emplace_back();
                    run.empty_parse.emplace_back();
                } else if (row >= run.instance_ids.size() || run.instance_ids[row] != id) {
                    throw DataError(where + ": instance id " + id +
                                    " does not match the first agent's order");
                }
                ScoredList list;
                for (const json& p : record.at("pairs")) {
                    const std::string polarity = p.at("polarity").get<std::string>();
                    auto parsed_pol = parse_polarity(polarity);
                    if (!parsed_pol)
                        throw DataError(where + ": unknown polarity \"" + polarity + "\"");
                    list.pairs.push_back(
                        {{p.at("category").get<std::string>(), *parsed_pol},
                         p.at("confidence").get<double>(),
                         code});
                }
                list.list_confidence = record.at("list_confidence").get<double>();
                run.lists[row].push_back(std::move(list));
                run.empty_parse[row].push_back(record.at("empty_parse").get<bool>());
                ++row;
            } catch (const json::exception& e) {
                throw DataError(where + ": " + e.what());
            }
        }
        if (row != run.instance_ids.size())
            throw DataError(path + ": expected " + std::to_string(run.instance_ids.size()) +
                            " records, found " + std::to_string(row));
    }
    if (run.instance_ids.empty()) throw DataError(rundir + ": run has no records");
    return run;
}

std::string_view to_string(Technique t) {
    switch (t) {
        case Technique::highest_prob_list: return "highest_prob_list";
        case Technique::most_common_list: return "most_common_list";
        case Technique::highest_prob_pairs: return "highest_prob_pairs";
        case Technique::clustered_pairs: return "clustered_pairs";
        case Technique::most_confident_agent: return "most_confident_agent";
        case Technique::joined: return "joined";
        case Technique::lowest_prob_list: return "lowest_prob_list";
    }
    return "";
}

std::optional<Technique> parse_technique(std::string_view s) {
    for (Technique t : {Technique::highest_prob_list, Technique::most_common_list,
                        Technique::highest_prob_pairs, Technique::clustered_pairs,
                        Technique::most_confident_agent, Technique::joined,
                        Technique::lowest_prob_list})
        if (s == to_string(t)) return t;
    return std::nullopt;
}

std::shared_ptr<Embedder> make_embedder_from_spec(const std::string& spec) {
    if (spec == "hash") return make_hash_embedder();
    if (spec.rfind("hash:", 0) == 0) {
        const std::string dim_text = spec.substr(5);
        std::size_t consumed = 0;
        unsigned long dim = 0;
        try {
            dim = std::stoul(dim_text, &consumed);
        } catch (const std::exception&) {
            throw ConfigError("bad embedder dimension in \"" + spec + "\"");
        }
        if (consumed != dim_text.size() || dim == 0)
            throw ConfigError("bad embedder dimension in \"" + spec + "\"");
        return make_hash_embedder(dim);
    }

    std::ifstream in(spec);
    if (!in) throw ConfigError("cannot open embedder config " + spec);
    json config;
    try {
        config = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("embedder config " + spec + ": " + e.what());
    }
    const std::string type = config.value("type", std::string{});
    if (type == "hash") return make_hash_embedder(config.value("dim", std::size_t{16}));
    if (type == "http") {
        HttpEmbedderConfig http;
        http.base_url = interpolate_env(config.value("base_url", std::string{}));
        http.api_key = interpolate_env(config.value("api_key", std::string{}));
        http.model = interpolate_env(config.value("model", std::string{}));
        http.path = config.value("path", http.path);
        http.timeout_seconds = config.value("timeout_seconds", http.timeout_seconds);
        if (http.base_url.empty())
            throw ConfigError("embedder config " + spec + " needs base_url");
        return make_http_embedder(std::move(http));
    }
    throw ConfigError("embedder config " + spec + ": type must be \"hash\" or \"http\"");
}

PredictionSet aggregate_run(const RunData& run, const AggregateConfig& config) {
    PredictionSet out;
    out.technique = std::string(to_string(config.technique));
    out.dataset = run.dataset;
    out.model = run.model;
    out.ids = run.instance_ids;
    out.predictions.reserve(run.lists.size());

    switch (config.technique) {
        case Technique::highest_prob_list:
            for (const auto& lists : run.lists)
                out.predictions.push_back(highest_probability_list(lists));
            break;
        case Technique::lowest_prob_list:
            for (const auto& lists : run.lists)
                out.predictions.push_back(lowest_probability_list(lists));
            break;
        case Technique::most_common_list:
            for (const auto& lists : run.lists)
                out.predictions.push_back(most_common_list(lists));
            break;
        case Technique::joined:
            for (const auto& lists : run.lists) out.predictions.push_back(joined_agent(lists));
            break;
        case Technique::most_confident_agent: {
            MostConfidentAgent winner = most_confident_agent(run.lists, run.agents);
            out.agent = winner.agent;
            for (const auto& lists : run.lists)
                out.predictions.push_back(pairs_of(lists[winner.agent_index]));
            break;
        }
        case Technique::highest_prob_pairs: {
            const double mu = median_pair_count(run.lists);
            out.mu = mu;
            out.alpha = config.alpha.to_string();
            out.resolve_conflicts = config.resolve_conflicts;
            for (const auto& lists : run.lists) {
                int n = estimate_n(lists, mu, config.alpha);
                out.predictions.push_back(
                    highest_probability_pairs(lists, n, config.resolve_conflicts));
            }
            break;
        }
        case Technique::clustered_pairs: {
            const double mu = median_pair_count(run.lists);
            out.mu = mu;
            out.alpha = config.alpha.to_string();
            out.seed = config.seed;
            auto embedder = make_embedder_from_spec(config.embedder_spec);
            out.embedder = embedder->name();
            for (const auto& lists : run.lists) {
                int n = estimate_n(lists, mu, config.alpha);
                ClusteredResult result = clustered_pairs(lists, n, *embedder, config.seed);
                if (result.embedder_failed) ++out.degraded_instances;
                out.predictions.push_back(std::move(result.pairs));
            }
            break;
        }
    }
    return out;
}

void write_predictions(const PredictionSet& preds, const std::string& path) {
    if (preds.ids.size() != preds.predictions.size())
        throw DataError("prediction set is ragged: " + std::to_string(preds.ids.size()) +
                        " ids vs " + std::to_string(preds.predictions.size()) + " predictions");
    namespace fs = std::filesystem;
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write predictions " + path);

    json header = {{"technique", preds.technique},
                   {"dataset", preds.dataset},
                   {"model", preds.model}};
    if (preds.alpha) header["alpha"] = *preds.alpha;
    if (preds.mu) header["mu"] = *preds.mu;
    if (preds.seed) header["seed"] = *preds.seed;
    if (preds.embedder) header["embedder"] = *preds.embedder;
    if (preds.agent) header["agent"] = *preds.agent;
    if (preds.resolve_conflicts) header["resolve_conflicts"] = true;
    if (preds.degraded_instances) header["degraded_instances"] = preds.degraded_instances;
    out << header.dump() << '\n';

    for (std::size_t i = 0; i < preds.ids.size(); ++i) {
        json pairs = json::array();
        for (const Pair& p : preds.predictions[i])
            pairs.push_back({p.category, std::string(to_string(p.polarity))});
        json row = {{"id", preds.ids[i]}, {"pairs", std::move(pairs)}};
        out << row.dump() << '\n';
    }
}

PredictionSet read_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open predictions " + path);
    PredictionSet preds;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "predictions " + path + " line " + std::to_string(line_no);
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        try {
            if (!have_header) {
                preds.technique = record.at("technique").get<std::string>();
                preds.dataset = record.value("dataset", std::string{});
                preds.model = record.value("model", std::string{});
                if (record.contains("alpha")) preds.alpha = record["alpha"].get<std::string>();
                if (record.contains("mu")) preds.mu = record["mu"].get<double>();
                if (record.contains("seed")) preds.seed = record["seed"].get<std::uint64_t>();
                if (record.contains("embedder"))
                    preds.embedder = record["embedder"].get<std::string>();
                if (record.contains("agent")) preds.agent = record["agent"].get<std::string>();
                preds.resolve_conflicts = record.value("resolve_conflicts", false);
                preds.degraded_instances = record.value("degraded_instances", std::size_t{0});
                have_header = true;
                continue;
            }
            PairList pairs;
            for (const json& p : record.at("pairs")) {
                if (!p.is_array() || p.size() != 2)
                    throw DataError(where + ": pairs entries must be [category, polarity]");
                const std::string polarity = p[1].get<std::string>();
                auto parsed_pol = parse_polarity(polarity);
                if (!parsed_pol)
                    throw DataError(where + ": unknown polarity \"" + polarity + "\"");
                pairs.push_back({p[0].get<std::string>(), *parsed_pol});
            }
            preds.ids.push_back(record.at("id").get<std::string>());
            preds.predictions.push_back(std::move(pairs));
        } catch (const json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
    }
    if (!have_header) throw DataError("predictions " + path + " has no header line");
    return preds;
}

}  // namespace acsa
