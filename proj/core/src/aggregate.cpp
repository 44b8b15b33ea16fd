#include "acsa/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "acsa/errors.hpp"
#include "acsa/kmeans.hpp"

namespace acsa {

AlphaPolicy AlphaPolicy::from_string(std::string_view s) {
    AlphaPolicy policy;
    if (s == "mean") {
        policy.kind = Kind::mean;
        return policy;
    }
    if (s == "max") {
        policy.kind = Kind::max;
        return policy;
    }
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw ConfigError("alpha must be 'mean', 'max' or a float in [0, 1], got '" +
                          std::string(s) + "'");
    }
    if (value < 0.0 || value > 1.0)
        throw ConfigError("alpha out of range [0, 1]: " + std::string(s));
    policy.alpha = value;
    return policy;
}

std::string AlphaPolicy::to_string() const {
    switch (kind) {
        case Kind::mean: return "mean";
        case Kind::max: return "max";
        case Kind::alpha: {
            // Trim trailing zeros for readability ("1", "0.9").
            std::string s = std::to_string(alpha);
            s.erase(s.find_last_not_of('0') + 1);
            if (!s.empty() && s.back() == '.') s.pop_back();
            return s;
        }
    }
    return "1";
}

PairList highest_probability_list(std::span<const ScoredList> agent_lists) {
    if (agent_lists.empty()) return {};
    std::size_t best = 0;
    for (std::size_t i = 1; i < agent_lists.size(); ++i)
        if (agent_lists[i].list_confidence > agent_lists[best].list_confidence) best = i;
    return pairs_of(agent_lists[best]);
}

PairList lowest_probability_list(std::span<const ScoredList> agent_lists) {
    if (agent_lists.empty()) return {};
    std::size_t worst = 0;
    for (std::size_t i = 1; i < agent_lists.size(); ++i)
        if (agent_lists[i].list_confidence < agent_lists[worst].list_confidence) worst = i;
    return pairs_of(agent_lists[worst]);
}

namespace {

std::string canonical_key(const PairList& canonical) {
    std::string key;
    for (const auto& p : canonical) {
        key += p.category;
        key += '\x1f';
        key += to_string(p.polarity);
        key += '\x1e';
    }
    return key;
}

}  // namespace

PairList most_common_list(std::span<const ScoredList> agent_lists) {
    if (agent_lists.empty()) return {};
    struct Group {
        PairList canonical;
        std::size_t count = 0;
        double best_confidence = -1.0;
        std::size_t first_agent = 0;
    };
    std::vector<Group> groups;
    std::map<std::string, std::size_t> by_key;
    for (std::size_t i = 0; i < agent_lists.size(); ++i) {
        PairList canonical = canonical_form(pairs_of(agent_lists[i]));
        std::string key = canonical_key(canonical);
        auto [it, inserted] = by_key.emplace(key, groups.size());
        if (inserted) groups.push_back(Group{std::move(canonical), 0, -1.0, i});
        Group& g = groups[it->second];
        ++g.count;
        g.best_confidence = std::max(g.best_confidence, agent_lists[i].list_confidence);
    }
    std::size_t max_count = 0;
    for (const auto& g : groups) max_count = std::max(max_count, g.count);
    // Strict plurality, otherwise the tied group holding the most
    // confident member; groups are in first-appearance (agent) order.
    std::size_t winner = groups.size();
    double winner_conf = -1.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].count != max_count) continue;
        if (winner == groups.size()) {
            winner = i;
            winner_conf = groups[i].best_confidence;
        } else if (groups[i].best_confidence > winner_conf) {
            winner = i;
            winner_conf = groups[i].best_confidence;
        }
    }
    return groups[winner].canonical;
}

double median_pair_count(const std::vector<std::vector<ScoredList>>& runs) {
    std::vector<double> counts;
    for (const auto& instance : runs)
        for (const auto& list : instance)
            counts.push_back(static_cast<double>(list.pairs.size()));
    if (counts.empty()) return 0.0;
    std::sort(counts.begin(), counts.end());
    std::size_t n = counts.size();
    if (n % 2 == 1) return counts[n / 2];
    return (counts[n / 2 - 1] + counts[n / 2]) / 2.0;
}

int estimate_n(std::span<const ScoredList> agent_lists, double dataset_median,
               const AlphaPolicy& policy) {
    if (agent_lists.empty()) return 0;
    if (policy.kind == AlphaPolicy::Kind::alpha) {
        double mean = 0.0;
        for (const auto& list : agent_lists) mean += static_cast<double>(list.pairs.size());
        mean /= static_cast<double>(agent_lists.size());
        double target = policy.alpha * mean + (1.0 - policy.alpha) * dataset_median;
        return static_cast<int>(std::llround(target));  // half away from zero
    }
    // Group the list confidences by pair count and reduce.
    std::map<std::size_t, std::vector<double>> groups;
    for (const auto& list : agent_lists)
        groups[list.pairs.size()].push_back(list.list_confidence);
    std::size_t best_n = 0;
    double best_value = -1.0;
    for (const auto& [count, confidences] : groups) {  // ascending count: ties keep smaller n
        double value = 0.0;
        if (policy.kind == AlphaPolicy::Kind::mean) {
            for (double c : confidences) value += c;
            value /= static_cast<double>(confidences.size());
        } else {
            value = *std::max_element(confidences.begin(), confidences.end());
        }
        if (value > best_value) {
            best_value = value;
            best_n = count;
        }
    }
    return static_cast<int>(best_n);
}

std::vector<ScoredPair> pooled_unique_pairs(std::span<const ScoredList> agent_lists) {
    std::vector<ScoredPair> pool;
    for (const auto& list : agent_lists) {
        for (const auto& sp : list.pairs) {
            auto it = std::find_if(pool.begin(), pool.end(),
                                   [&](const ScoredPair& q) { return q.pair == sp.pair; });
            if (it == pool.end()) {
                pool.push_back(sp);
            } else if (sp.confidence > it->confidence) {
                it->confidence = sp.confidence;
                it->source_agent = sp.source_agent;
            }
        }
    }
    std::sort(pool.begin(), pool.end(), [](const ScoredPair& a, const ScoredPair& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return pair_less(a.pair, b.pair);
    });
    return pool;
}

namespace {

std::vector<ScoredPair> resolve_category_conflicts(std::vector<ScoredPair> ranked) {
    // ranked is confidence-descending, so the first occurrence of each
    // category is its most confident polarity.
    std::vector<ScoredPair> kept;
    for (auto& sp : ranked) {
        bool seen = false;
        for (const auto& k : kept)
            if (k.pair.category == sp.pair.category) {
                seen = true;
                break;
            }
        if (!seen) kept.push_back(std::move(sp));
    }
    return kept;
}

}  // namespace

PairList highest_probability_pairs(std::span<const ScoredList> agent_lists, int n,
                                   bool resolve_conflicts) {
    if (n <= 0) return {};
    std::vector<ScoredPair> ranked = pooled_unique_pairs(agent_lists);
    if (resolve_conflicts) ranked = resolve_category_conflicts(std::move(ranked));
    PairList out;
    for (const auto& sp : ranked) {
        if (out.size() == static_cast<std::size_t>(n)) break;
        out.push_back(sp.pair);
    }
    return out;
}

ClusteredResult clustered_pairs(std::span<const ScoredList> agent_lists, int n, Embedder& embedder,
                                std::uint64_t seed) {
    ClusteredResult result;
    if (n <= 0) return result;
    std::vector<ScoredPair> unique = pooled_unique_pairs(agent_lists);
    if (unique.empty()) return result;
    if (unique.size() <= static_cast<std::size_t>(n)) {
        for (const auto& sp : unique) result.pairs.push_back(sp.pair);
        return result;
    }

    std::vector<std::string> categories;
    categories.reserve(unique.size());
    for (const auto& sp : unique) categories.push_back(sp.pair.category);
    std::vector<EmbeddingVector> points;
    try {
        points = embedder.embed(categories);
        if (points.size() != categories.size())
            throw BackendError("embedder returned the wrong number of vectors");
    } catch (const Error&) {
        result.pairs = highest_probability_pairs(agent_lists, n, false);
        result.embedder_failed = true;
        return result;
    }

    KMeansOptions options;
    options.seed = seed;
    KMeansResult clusters = kmeans(points, n, options);
    // unique is confidence-ranked, so the first member of each cluster
    // is its most confident pair.
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (std::size_t i = 0; i < unique.size(); ++i) {
        auto label = static_cast<std::size_t>(clusters.assignment[i]);
        if (taken[label]) continue;
        taken[label] = true;
        result.pairs.push_back(unique[i].pair);
    }
    return result;
}

MostConfidentAgent most_confident_agent(const std::vector<std::vector<ScoredList>>& runs,
                                        std::span<const std::string> agents) {
    MostConfidentAgent out;
    if (agents.empty()) return out;
    std::vector<double> totals(agents.size(), 0.0);
    for (const auto& instance : runs) {
        if (instance.size() != agents.size())
            throw DataError("most_confident_agent: ragged agent matrix");
        for (std::size_t a = 0; a < agents.size(); ++a)
            totals[a] += instance[a].list_confidence;
    }
    std::size_t best = 0;
    for (std::size_t a = 1; a < agents.size(); ++a)
        if (totals[a] > totals[best]) best = a;
    out.agent_index = best;
    out.agent = agents[best];
    out.total_confidence = totals[best];
    return out;
}

PairList joined_agent(std::span<const ScoredList> agent_lists) {
    PairList all;
    for (const auto& list : agent_lists)
        for (const auto& sp : list.pairs) all.push_back(sp.pair);
    return canonical_form(all);
}

}  // namespace acsa
