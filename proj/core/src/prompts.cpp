#include "acsa/prompts.hpp"

#include <algorithm>
#include <random>

#include "acsa/errors.hpp"

namespace acsa {

std::string_view to_string(PromptMode mode) {
    switch (mode) {
        case PromptMode::enumerated: return "enumerated";
        case PromptMode::multihop: return "multihop";
        case PromptMode::fewshot: return "fewshot";
    }
    return "enumerated";
}

std::optional<PromptMode> parse_prompt_mode(std::string_view s) {
    if (s == "enumerated") return PromptMode::enumerated;
    if (s == "multihop") return PromptMode::multihop;
    if (s == "fewshot") return PromptMode::fewshot;
    return std::nullopt;
}

std::string system_instruction() {
    return "You are a Natural Language Processing assistant, expert in Aspect-Based Sentiment "
           "Analysis. I want you to force yourself to pick words that you are being asked and "
           "only them, without explanations or reasoning. If you are unsure, put the most "
           "probable. Now follow the following steps:";
}

std::string render_schema_list(const CategorySchema& schema, bool quoted) {
    std::string out = "[";
    for (std::size_t i = 0; i < schema.labels.size(); ++i) {
        if (i > 0) out += ", ";
        if (quoted) {
            out += "'";
            out += schema.labels[i];
            out += "'";
        } else {
            out += schema.labels[i];
        }
    }
    out += "]";
    return out;
}

std::string render_pair_list_python(const PairList& pairs) {
    std::string out = "[";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i > 0) out += ", ";
        out += "('";
        out += pairs[i].category;
        out += "', '";
        out += to_string(pairs[i].polarity);
        out += "')";
    }
    out += "]";
    return out;
}

namespace {

constexpr std::string_view kEnumeratedSeparator = "-----------------------------------";
constexpr std::string_view kFewshotLongSeparator = "----------------------------";
constexpr std::string_view kFewshotShortSeparator = "-------";

std::string quoted_text(std::string_view text) {
    std::string out = "\"";
    out += text;
    out += "\"";
    return out;
}

// The instruction for an element that opens the chain; it carries the
// review text.
std::string first_instruction(Element element, std::string_view text,
                              const CategorySchema& schema, std::string_view domain,
                              PromptMode mode) {
    std::string out;
    switch (element) {
        case Element::aspect:
            out = "Given the following text, list all word sequences that denote an aspect term "
                  "of the ";
            out += domain;
            out += " domain:";
            break;
        case Element::opinion:
            out = "Given the following text, list all word sequences that denote or link to an "
                  "opinion:";
            break;
        case Element::category:
            out = "Given the following text, list the categories. The list of possible "
                  "categories is:";
            switch (mode) {
                case PromptMode::enumerated:
                    out += " " + render_schema_list(schema, false) + ".";
                    break;
                case PromptMode::multihop:
                    out += "\n" + render_schema_list(schema, true);
                    break;
                case PromptMode::fewshot:
                    out += "\n\n" + render_schema_list(schema, true) + ".";
                    break;
            }
            break;
    }
    out += "\n\n";
    out += quoted_text(text);
    return out;
}

// The instruction for an element later in the chain. The wording is
// fixed per element regardless of what actually preceded it.
std::string subsequent_instruction(Element element, const CategorySchema& schema,
                                   std::string_view domain, PromptMode mode) {
    switch (element) {
        case Element::aspect: {
            std::string out = "List all word sequences that denote an aspect term of the ";
            out += domain;
            out += " domain.";
            return out;
        }
        case Element::opinion:
            return "List all word sequences that denote or link to an opinion from the aspects "
                   "detected.";
        case Element::category: {
            std::string out =
                "List the categories from the opinions detected. The list of possible categories "
                "is:";
            switch (mode) {
                case PromptMode::enumerated:
                    out += " " + render_schema_list(schema, false) + ".";
                    break;
                case PromptMode::multihop:
                    out += "\n" + render_schema_list(schema, true);
                    break;
                case PromptMode::fewshot:
                    out += "\n\n" + render_schema_list(schema, true) + ".";
                    break;
            }
            return out;
        }
    }
    return {};
}

std::string join_blocks(const std::vector<std::string>& blocks) {
    std::string out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += blocks[i];
    }
    return out;
}

void require_schema(const CategorySchema& schema) {
    if (schema.labels.empty()) throw ConfigError("prompt builder needs a non-empty schema");
}

std::vector<std::string> cot_slot_blocks(const ElementOrder& order) {
    std::vector<std::string> blocks;
    blocks.emplace_back(kFewshotShortSeparator);
    blocks.emplace_back("BEGIN COT");
    for (Element e : order.sequence) blocks.push_back(std::string(plural_name(e)) + ": ...");
    blocks.emplace_back("END COT");
    blocks.emplace_back(kFewshotShortSeparator);
    return blocks;
}

std::string fewshot_step_bullet(const ElementOrder& order) {
    int cat_step = order.position_of(Element::category) + 1;
    int op_step = order.position_of(Element::opinion) + 1;
    std::string out = "• Where the categories derive from step ";
    out += std::to_string(cat_step);
    out += " Categories in COT and each associated category's sentiment is either 'positive', "
           "'neutral' or 'negative', based on step ";
    out += std::to_string(op_step);
    out += " the extracted Opinions.";
    return out;
}

std::vector<std::string> fewshot_instruction_blocks(const ElementOrder& order,
                                                    std::string_view text,
                                                    const CategorySchema& schema,
                                                    std::string_view domain) {
    std::vector<std::string> blocks;
    blocks.push_back(
        first_instruction(order.sequence[0], text, schema, domain, PromptMode::fewshot));
    blocks.push_back(subsequent_instruction(order.sequence[1], schema, domain, PromptMode::fewshot));
    blocks.push_back(subsequent_instruction(order.sequence[2], schema, domain, PromptMode::fewshot));
    return blocks;
}

}  // namespace

PromptBundle build_enumerated(const ElementOrder& order, std::string_view text,
                              const CategorySchema& schema, std::string_view domain) {
    require_schema(schema);
    std::vector<std::string> blocks;
    for (int i = 0; i < 3; ++i) {
        Element e = order.sequence[static_cast<std::size_t>(i)];
        std::string body = i == 0
                               ? first_instruction(e, text, schema, domain, PromptMode::enumerated)
                               : subsequent_instruction(e, schema, domain, PromptMode::enumerated);
        blocks.push_back(std::to_string(i + 1) + ". " + body);
    }
    blocks.emplace_back(kEnumeratedSeparator);
    for (int i = 0; i < 3; ++i) {
        Element e = order.sequence[static_cast<std::size_t>(i)];
        blocks.push_back(std::to_string(i + 1) + ". " + std::string(plural_name(e)) + ":");
    }
    blocks.emplace_back("Lastly, please provide one Python-type list of tuples such as");
    blocks.emplace_back(
        "\"[('example_category_1', 'positive'), ('example_category_2', 'negative'), ...]\"");
    blocks.emplace_back(
        "where the categories are provided above and the sentiment is either positive, neutral, "
        "or negative, based on the extracted opinions.");

    PromptBundle bundle;
    bundle.system = system_instruction();
    bundle.user_turns.push_back(join_blocks(blocks));
    bundle.order = order;
    bundle.mode = PromptMode::enumerated;
    return bundle;
}

PromptBundle build_multihop(const ElementOrder& order, std::string_view text,
                            const CategorySchema& schema, std::string_view domain) {
    require_schema(schema);
    PromptBundle bundle;
    bundle.system = system_instruction();
    bundle.user_turns.push_back(
        first_instruction(order.sequence[0], text, schema, domain, PromptMode::multihop));
    bundle.user_turns.push_back(
        subsequent_instruction(order.sequence[1], schema, domain, PromptMode::multihop));
    bundle.user_turns.push_back(
        subsequent_instruction(order.sequence[2], schema, domain, PromptMode::multihop));
    bundle.user_turns.push_back(
        "Lastly, please provide one Python type list of tuples such as:\n"
        "[('example_category_1', 'positive'),\n ('example_category_2', 'negative'), ...]\n"
        "that you identified. Where the categories are provided above and the sentiment is "
        "either 'positive', 'neutral' or 'negative', based on the extracted opinions.");
    bundle.order = order;
    bundle.mode = PromptMode::multihop;
    return bundle;
}

PromptBundle build_fewshot(const ElementOrder& order, std::string_view text,
                           const CategorySchema& schema, std::string_view domain,
                           std::span<const FewshotExample> examples) {
    require_schema(schema);
    if (examples.empty()) throw ConfigError("fewshot prompt needs at least one example");

    std::vector<std::string> blocks = fewshot_instruction_blocks(order, text, schema, domain);
    blocks.emplace_back("• The reasoning must appear only between BEGIN COT and END COT.");
    for (auto& b : cot_slot_blocks(order)) blocks.push_back(std::move(b));
    blocks.emplace_back(
        "• Outside those markers print one PYTHON LIST of tuples, exactly like");
    blocks.emplace_back(
        "[('example_category_1', 'negative'), ('example_category_2', 'positive')] that you "
        "identify in your three step COT reasoning.");
    blocks.push_back(fewshot_step_bullet(order));

    blocks.emplace_back(kFewshotLongSeparator);
    blocks.emplace_back("EXAMPLES");
    blocks.emplace_back(kFewshotLongSeparator);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        blocks.push_back("Example " + std::to_string(i + 1));
        blocks.push_back("Review: " + quoted_text(examples[i].text));
        for (auto& b : cot_slot_blocks(order)) blocks.push_back(std::move(b));
        blocks.push_back("PYTHON LIST: " + render_pair_list_python(examples[i].gold));
    }

    blocks.emplace_back(kFewshotLongSeparator);
    blocks.emplace_back("NOW SOLVE THE NEW REVIEW");
    blocks.emplace_back(kFewshotLongSeparator);
    blocks.emplace_back("• Please complete the below CoT and end it with END COT.");
    for (auto& b : fewshot_instruction_blocks(order, text, schema, domain))
        blocks.push_back(std::move(b));
    blocks.emplace_back(
        "• After completing the three step COT reasoning and closing it with END COT, print "
        "the PYTHON LIST of tuples, exactly like [('example_category_1', 'negative'), "
        "('example_category_2', 'positive')] that you identify in your three step COT reasoning.");
    blocks.push_back(fewshot_step_bullet(order));
    blocks.emplace_back("• DO NOT FORGET the PYTHON LIST.");
    blocks.emplace_back(kFewshotShortSeparator);
    blocks.emplace_back("BEGIN COT");
    blocks.push_back(std::string(plural_name(order.sequence[0])) + ": ...");

    PromptBundle bundle;
    bundle.system = system_instruction();
    bundle.user_turns.push_back(join_blocks(blocks));
    bundle.order = order;
    bundle.mode = PromptMode::fewshot;
    return bundle;
}

CategorySchema shuffled_schema(const CategorySchema& schema, std::uint64_t seed) {
    CategorySchema out = schema;
    std::mt19937_64 rng(seed);
    // Fisher-Yates by hand; std::shuffle's permutation is not pinned by
    // the standard.
    for (std::size_t i = out.labels.size(); i > 1; --i) {
        std::size_t j = rng() % i;
        std::swap(out.labels[i - 1], out.labels[j]);
    }
    return out;
}

}  // namespace acsa
