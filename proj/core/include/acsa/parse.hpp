#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "acsa/domain.hpp"

namespace acsa {

/// One tuple recovered from a generation, before and after schema mapping.
/// The spans address the inner string literals (quotes excluded) inside
/// the generation text, for token-overlap confidence scoring.
struct ParsedPair {
    std::string raw_category;
    std::string raw_polarity;
    std::string mapped_category;
    Polarity mapped_polarity = Polarity::neutral;
    CharSpan category_span;
    CharSpan polarity_span;
    double match_ratio = 0.0;  // similarity(raw_category, mapped_category)
};

struct ParsedList {
    std::vector<ParsedPair> pairs;
    CharSpan list_span;         // the chosen bracketed list inside the text
    int dropped_tuples = 0;     // wrong arity or unquoted elements
    int dropped_low_ratio = 0;  // below the map_category floor
};

/// Finds the last parseable Python-style list of tuples in the text.
/// Tolerates single or double quotes, arbitrary whitespace and trailing
/// commas; tuples whose arity is not 2 are dropped and counted. Returns
/// nullopt when no candidate list exists (the empty-parse case: callers
/// record an empty prediction, never crash). Mapping fields are left
/// untouched; see parse_generation.
std::optional<ParsedList> extract_list(std::string_view text);

/// Ratio-style string similarity in [0, 1]: repeatedly take the longest
/// common contiguous block (earliest position on ties), recurse on the
/// unmatched fragments on both sides, and return 2*M/(|a|+|b|) where M
/// is the total matched length. Inputs are ASCII case-folded first; two
/// empty strings compare as 1.
double similarity(std::string_view a, std::string_view b);

/// Nearest schema label by similarity plus the achieved ratio. Ties go
/// to the earlier label in schema order. Total: every input maps.
std::pair<std::string, double> map_category(std::string_view raw, const CategorySchema& schema);

/// Case-folded exact match first, otherwise nearest of positive,
/// neutral, negative by similarity (ties in that order).
Polarity map_polarity(std::string_view raw);

/// extract_list + schema mapping in one step. Pairs whose best category
/// ratio is below min_ratio are dropped and counted; the default floor 0
/// keeps everything.
std::optional<ParsedList> parse_generation(std::string_view text, const CategorySchema& schema,
                                           double min_ratio = 0.0);

}  // namespace acsa
