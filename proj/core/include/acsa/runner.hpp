#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acsa/aggregate.hpp"
#include "acsa/datasets.hpp"
#include "acsa/domain.hpp"
#include "acsa/embed.hpp"
#include "acsa/io.hpp"
#include "acsa/llm.hpp"
#include "acsa/prompts.hpp"

namespace acsa {

struct RunConfig {
    std::string corpus_path;
    std::string rundir;
    PromptMode mode = PromptMode::enumerated;
    std::vector<ElementOrder> orders;  // empty: all six
    Split split = Split::test;
    std::string model = "mock";
    DecodeOptions decode;
    int concurrency = 4;
    int fewshot_k = 5;  // examples per fewshot prompt, at most 10
    std::uint64_t fewshot_seed = 0;
    std::optional<std::uint64_t> shuffle_seed;  // schema render-order ablation
    double min_ratio = 0.0;  // category-mapping floor passed to the parser
};

struct RunSummary {
    std::size_t instances = 0;
    std::size_t agents = 0;
    std::size_t requests = 0;  // generate calls issued (4 per instance for multihop)
    std::size_t cache_hits = 0;
    std::size_t backend_calls = 0;
};

/// Plays the four turns of a multihop bundle, appending each assistant
/// reply to the history before the next user turn. A failing hop
/// rethrows its error with the hop index prefixed.
std::vector<GenerationResponse> run_multihop_thread(Client& client, const PromptBundle& bundle,
                                                    const std::string& model,
                                                    const DecodeOptions& decode);

/// Fans out every (instance, agent) generation over a bounded worker
/// pool, parses and scores each final answer, and writes the run
/// directory: run.json, cache.jsonl, records/<AGENT>.jsonl. Reruns
/// replay the cache and rewrite identical records.
RunSummary execute_run(const RunConfig& config, std::shared_ptr<Backend> backend,
                       const DatasetManifest& manifest, const Corpus& corpus);

/// A run directory loaded back for aggregation and analysis.
struct RunData {
    std::string dataset;
    std::string model;
    std::string corpus_path;
    PromptMode mode = PromptMode::enumerated;
    std::vector<std::string> agents;             // order codes, run order
    std::vector<std::string> instance_ids;       // corpus order
    std::vector<std::vector<ScoredList>> lists;  // [instance][agent]
    std::vector<std::vector<bool>> empty_parse;  // [instance][agent]
};

RunData load_run(const std::string& rundir);

enum class Technique {
    highest_prob_list,
    most_common_list,
    highest_prob_pairs,
    clustered_pairs,
    most_confident_agent,
    joined,
    lowest_prob_list,  // analysis probe, not a headline technique
};

std::string_view to_string(Technique t);
std::optional<Technique> parse_technique(std::string_view s);

struct AggregateConfig {
    Technique technique = Technique::highest_prob_list;
    AlphaPolicy alpha;                  // pair-count policy for pair techniques
    std::string embedder_spec = "hash"; // "hash", "hash:<dim>" or a JSON config path
    std::uint64_t seed = 0;             // clustering seed
    bool resolve_conflicts = false;
};

/// One prediction per instance plus the technique metadata header.
struct PredictionSet {
    std::string technique;
    std::string dataset;
    std::string model;
    std::optional<std::string> alpha;
    std::optional<double> mu;             // dataset median pair count
    std::optional<std::uint64_t> seed;
    std::optional<std::string> embedder;
    std::optional<std::string> agent;     // most_confident_agent winner
    bool resolve_conflicts = false;
    std::size_t degraded_instances = 0;   // clustering fallbacks
    std::vector<std::string> ids;
    std::vector<PairList> predictions;
};

PredictionSet aggregate_run(const RunData& run, const AggregateConfig& config);

/// Header line then {"id", "pairs": [[category, polarity]...]} per instance.
void write_predictions(const PredictionSet& preds, const std::string& path);
PredictionSet read_predictions(const std::string& path);

/// "hash", "hash:<dim>", or a JSON file {"type": "http", "base_url",
/// "api_key", "model", ...} with ${ENV} interpolation.
std::shared_ptr<Embedder> make_embedder_from_spec(const std::string& spec);

}  // namespace acsa
