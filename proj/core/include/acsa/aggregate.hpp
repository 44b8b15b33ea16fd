#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "acsa/domain.hpp"
#include "acsa/embed.hpp"

namespace acsa {

/// How many pairs a pair-level technique keeps per instance: a fixed
/// interpolation weight, or pick the count whose supporters are most
/// confident on average / at peak.
struct AlphaPolicy {
    enum class Kind { alpha, mean, max };
    Kind kind = Kind::alpha;
    double alpha = 1.0;  // only for Kind::alpha, in [0, 1]

    /// Accepts "mean", "max" or a float in [0, 1].
    static AlphaPolicy from_string(std::string_view s);
    std::string to_string() const;
};

/// The list with the highest list confidence; ties keep the earlier agent.
PairList highest_probability_list(std::span<const ScoredList> agent_lists);

/// Analysis-only probe: the least confident list.
PairList lowest_probability_list(std::span<const ScoredList> agent_lists);

/// Groups lists by canonical form and returns the strict plurality
/// winner; among tied groups, the one containing the single most
/// confident list (earlier agent on a further tie). Returns the
/// canonical form of the winning group.
PairList most_common_list(std::span<const ScoredList> agent_lists);

/// Median pair count over every (instance, agent) list; the mean of the
/// two middle values when the population is even.
double median_pair_count(const std::vector<std::vector<ScoredList>>& runs);

/// Target pair count for one instance. Kind::alpha rounds
/// alpha*mean_i(n_i) + (1-alpha)*dataset_median half away from zero;
/// mean/max group the agents' list confidences by pair count, reduce
/// each group, and take the count with the largest reduced value
/// (smaller count on ties).
int estimate_n(std::span<const ScoredList> agent_lists, double dataset_median,
               const AlphaPolicy& policy);

/// Every distinct (category, polarity) across the agents at its maximum
/// confidence, sorted by confidence descending, then category, then
/// polarity. The kept source_agent is the earliest agent achieving the
/// maximum.
std::vector<ScoredPair> pooled_unique_pairs(std::span<const ScoredList> agent_lists);

/// Top n of the pooled ranking. With resolve_conflicts, only the most
/// confident polarity of each category stays in the ranking, so later
/// pairs back-fill the freed slots.
PairList highest_probability_pairs(std::span<const ScoredList> agent_lists, int n,
                                   bool resolve_conflicts = false);

struct ClusteredResult {
    PairList pairs;
    bool embedder_failed = false;  // fell back to highest_probability_pairs
};

/// k-means over the category embeddings of the pooled unique pairs with
/// k = min(n, #unique); the most confident pair of each cluster is kept
/// (clusters emptied by duplicate embeddings contribute nothing). When
/// the embedder throws, falls back to highest_probability_pairs and
/// flags it.
ClusteredResult clustered_pairs(std::span<const ScoredList> agent_lists, int n, Embedder& embedder,
                                std::uint64_t seed = 0);

struct MostConfidentAgent {
    std::size_t agent_index = 0;
    std::string agent;  // ElementOrder code of the winner
    double total_confidence = 0.0;
};

/// The agent with the largest summed list confidence over the whole
/// dataset (earlier agent on ties). runs is [instance][agent].
MostConfidentAgent most_confident_agent(const std::vector<std::vector<ScoredList>>& runs,
                                        std::span<const std::string> agents);

/// Union of all agents' pairs, deduplicated, in canonical order.
PairList joined_agent(std::span<const ScoredList> agent_lists);

}  // namespace acsa
