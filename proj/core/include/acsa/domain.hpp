#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace acsa {

enum class Polarity { positive, neutral, negative };

std::string_view to_string(Polarity p);

/// Exact match on "positive"/"neutral"/"negative" only. Fuzzy recovery
/// of model output lives in map_polarity (parse.hpp).
std::optional<Polarity> parse_polarity(std::string_view s);

/// One aspect-category sentiment prediction or annotation.
struct Pair {
    std::string category;
    Polarity polarity = Polarity::neutral;

    friend bool operator==(const Pair&, const Pair&) = default;
};

/// Byte-wise (category, polarity string) order used everywhere a
/// deterministic pair order is needed.
bool pair_less(const Pair& a, const Pair& b);

using PairList = std::vector<Pair>;

/// Exact-duplicate removal plus byte-wise sort; the equality key for
/// list-level voting.
PairList canonical_form(const PairList& list);

/// The closed label set of one dataset, in render order.
struct CategorySchema {
    std::vector<std::string> labels;
    std::string domain_name;

    /// Validates: at least one label, no empty labels, no duplicates
    /// after ASCII case-folding. Throws ConfigError.
    static CategorySchema make(std::vector<std::string> labels, std::string domain_name);
};

enum class Element { aspect, category, opinion };

std::string_view plural_name(Element e);  // "Aspects", "Categories", "Opinions"

/// A permutation of the three chain-of-thought elements.
struct ElementOrder {
    std::array<Element, 3> sequence{Element::aspect, Element::category, Element::opinion};

    /// Compact identifier, e.g. "ACO" for aspect > category > opinion.
    std::string code() const;
    /// Human-readable form, e.g. "A>C>O".
    std::string label() const;
    /// 0-based position of an element in the chain.
    int position_of(Element e) const;

    static std::optional<ElementOrder> from_code(std::string_view code);

    friend bool operator==(const ElementOrder&, const ElementOrder&) = default;
};

/// All six orders, lexicographic with aspect < category < opinion:
/// ACO, AOC, CAO, COA, OAC, OCA.
std::vector<ElementOrder> all_element_orders();

enum class Split { train, val, test };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

struct Instance {
    std::string id;
    std::string text;
    PairList gold;
    Split split = Split::test;
};

/// Half-open [begin, end) character range into a generation text.
struct CharSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool empty() const { return begin >= end; }
    bool overlaps(const CharSpan& o) const { return begin < o.end && o.begin < end; }

    friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct ScoredPair {
    Pair pair;
    double confidence = 0.0;   // in [0, 1]
    std::string source_agent;  // ElementOrder code
};

/// One agent's prediction for one instance.
struct ScoredList {
    std::vector<ScoredPair> pairs;
    double list_confidence = 0.0;  // mean of pair confidences, 0 when empty
};

/// Computes list_confidence from the pairs.
ScoredList make_scored_list(std::vector<ScoredPair> pairs);

/// Strips confidences, keeps order.
PairList pairs_of(const ScoredList& list);

}  // namespace acsa
