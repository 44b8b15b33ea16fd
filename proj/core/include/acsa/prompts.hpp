#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acsa/domain.hpp"

namespace acsa {

enum class PromptMode { enumerated, multihop, fewshot };

std::string_view to_string(PromptMode mode);
std::optional<PromptMode> parse_prompt_mode(std::string_view s);

struct FewshotExample {
    std::string text;
    PairList gold;
};

struct PromptBundle {
    std::string system;
    std::vector<std::string> user_turns;  // 1 for enumerated/fewshot, 4 for multihop
    ElementOrder order;
    PromptMode mode = PromptMode::enumerated;
};

/// The role-playing system instruction shared by all modes.
std::string system_instruction();

/// Schema labels between square brackets, comma separated; quoted wraps
/// each label in single quotes.
std::string render_schema_list(const CategorySchema& schema, bool quoted);

/// Python-style list of tuples: [('CAT', 'polarity'), ...].
std::string render_pair_list_python(const PairList& pairs);

/// Single user turn: numbered element instructions in chain order (the
/// first embeds the review text), a dashed separator, numbered answer
/// slots, and the closing list-of-tuples instruction.
PromptBundle build_enumerated(const ElementOrder& order, std::string_view text,
                              const CategorySchema& schema, std::string_view domain);

/// Four user turns: one element instruction per call (answers are
/// appended to the thread by the runner), then the closing instruction.
PromptBundle build_multihop(const ElementOrder& order, std::string_view text,
                            const CategorySchema& schema, std::string_view domain);

/// Single user turn: instruction block with BEGIN COT / END COT
/// reasoning markers, worked EXAMPLES rendered from training instances,
/// and the NOW SOLVE THE NEW REVIEW block with explicit reminders.
PromptBundle build_fewshot(const ElementOrder& order, std::string_view text,
                           const CategorySchema& schema, std::string_view domain,
                           std::span<const FewshotExample> examples);

/// Deterministically shuffles the schema's label render order; the
/// ablation knob behind --shuffle-categories.
CategorySchema shuffled_schema(const CategorySchema& schema, std::uint64_t seed);

}  // namespace acsa
