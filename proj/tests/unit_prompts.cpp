#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "acsa/domain.hpp"
#include "acsa/errors.hpp"
#include "acsa/prompts.hpp"
#include "test_util.hpp"

using namespace acsa;

namespace {

const std::string kBarReview =
    "We went again and sat at the bar this time, I had 5 pints of guinness and not one "
    "buy-back, I ordered a basket of onion rings and there were about 5 in the basket, the "
    "rest was filled with crumbs, the chili was not even edible.";

CategorySchema restaurant_v1() {
  return CategorySchema::make(
      {"menu", "service", "price", "ambience", "place", "staff", "miscellaneous", "food"},
      "restaurant");
}

CategorySchema restaurant16() {
  return CategorySchema::make(
      {"FOOD#QUALITY", "AMBIENCE#GENERAL", "SERVICE#GENERAL", "RESTAURANT#PRICES",
       "DRINKS#QUALITY", "FOOD#PRICES", "RESTAURANT#MISCELLANEOUS", "LOCATION#GENERAL",
       "DRINKS#STYLE_OPTIONS", "DRINKS#PRICES", "FOOD#STYLE_OPTIONS", "RESTAURANT#GENERAL"},
      "restaurant");
}

ElementOrder order_of(const std::string& code) {
  auto order = ElementOrder::from_code(code);
  REQUIRE(order.has_value());
  return *order;
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1))
    ++count;
  return count;
}

}  // namespace

TEST_CASE("prompt mode names round-trip") {
  for (PromptMode mode :
       {PromptMode::enumerated, PromptMode::multihop, PromptMode::fewshot}) {
    auto parsed = parse_prompt_mode(to_string(mode));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == mode);
  }
  CHECK_FALSE(parse_prompt_mode("oneshot").has_value());
  CHECK_FALSE(parse_prompt_mode("Enumerated").has_value());
  CHECK_FALSE(parse_prompt_mode("").has_value());
}

TEST_CASE("system instruction matches the pinned wording") {
  CHECK(system_instruction() == testutil::fixture_text("prompts/system_instruction.txt"));
}

TEST_CASE("schema list rendering") {
  auto schema = CategorySchema::make({"food", "service"}, "restaurant");
  CHECK(render_schema_list(schema, false) == "[food, service]");
  CHECK(render_schema_list(schema, true) == "['food', 'service']");
  auto one = CategorySchema::make({"laptops"}, "laptop");
  CHECK(render_schema_list(one, false) == "[laptops]");
}

TEST_CASE("python pair-list rendering") {
  CHECK(render_pair_list_python({}) == "[]");
  PairList pairs = {{"SERVICE#GENERAL", Polarity::positive}, {"food", Polarity::negative}};
  CHECK(render_pair_list_python(pairs) ==
        "[('SERVICE#GENERAL', 'positive'), ('food', 'negative')]");
}

TEST_CASE("enumerated prompt regenerates the golden transcript byte for byte") {
  auto bundle = build_enumerated(order_of("AOC"), kBarReview, restaurant_v1(), "restaurant");
  CHECK(bundle.system == system_instruction());
  CHECK(bundle.mode == PromptMode::enumerated);
  CHECK(bundle.order.code() == "AOC");
  REQUIRE(bundle.user_turns.size() == 1);
  CHECK(bundle.user_turns[0] == testutil::fixture_text("prompts/enumerated_aoc_restaurant.txt"));
}

TEST_CASE("enumerated prompt structure holds for every chain order") {
  auto schema = restaurant_v1();
  for (const auto& order : all_element_orders()) {
    CAPTURE(order.code());
    auto bundle = build_enumerated(order, kBarReview, schema, "restaurant");
    REQUIRE(bundle.user_turns.size() == 1);
    const std::string& turn = bundle.user_turns[0];

    // The review is embedded exactly once, inside step 1.
    CHECK(count_occurrences(turn, kBarReview) == 1);
    CHECK(turn.rfind("1. Given the following text,", 0) == 0);

    // One separator line of exactly 35 dashes.
    CHECK(count_occurrences(turn, "\n\n-----------------------------------\n\n") == 1);
    CHECK(turn.find("------------------------------------") == std::string::npos);

    // Answer slots repeat the chain order.
    std::string slots;
    for (int i = 0; i < 3; ++i) {
      slots += std::to_string(i + 1) + ". ";
      slots += plural_name(order.sequence[static_cast<std::size_t>(i)]);
      slots += ":";
      slots += i < 2 ? "\n\n" : "";
    }
    CHECK(turn.find(slots) != std::string::npos);

    // The closing instruction asks for the tuple list.
    CHECK(turn.find("one Python-type list of tuples") != std::string::npos);
    CHECK(turn.find("[('example_category_1', 'positive'), ('example_category_2', "
                    "'negative'), ...]") != std::string::npos);

    // Inline unquoted schema with a trailing period.
    CHECK(turn.find("is: [menu, service, price, ambience, place, staff, miscellaneous, "
                    "food].") != std::string::npos);
  }
}

TEST_CASE("first step carries the element-specific opening") {
  auto schema = restaurant_v1();
  auto cao = build_enumerated(order_of("CAO"), "Fine.", schema, "restaurant");
  CHECK(cao.user_turns[0].rfind("1. Given the following text, list the categories.", 0) == 0);
  auto oac = build_enumerated(order_of("OAC"), "Fine.", schema, "restaurant");
  CHECK(oac.user_turns[0].rfind(
            "1. Given the following text, list all word sequences that denote or link to an "
            "opinion:", 0) == 0);
  auto aco = build_enumerated(order_of("ACO"), "Fine.", schema, "laptop");
  CHECK(aco.user_turns[0].find("an aspect term of the laptop domain:") != std::string::npos);
}

TEST_CASE("multihop prompt regenerates the four golden turns") {
  auto bundle = build_multihop(order_of("AOC"), kBarReview, restaurant_v1(), "restaurant");
  CHECK(bundle.system == system_instruction());
  CHECK(bundle.mode == PromptMode::multihop);
  REQUIRE(bundle.user_turns.size() == 4);
  CHECK(bundle.user_turns[0] == testutil::fixture_text("prompts/multihop_turn1.txt"));
  CHECK(bundle.user_turns[1] == testutil::fixture_text("prompts/multihop_turn2.txt"));
  CHECK(bundle.user_turns[2] == testutil::fixture_text("prompts/multihop_turn3.txt"));
  CHECK(bundle.user_turns[3] == testutil::fixture_text("prompts/multihop_turn4.txt"));
}

TEST_CASE("multihop turn order follows the chain") {
  auto bundle = build_multihop(order_of("COA"), "Good value.", restaurant_v1(), "restaurant");
  REQUIRE(bundle.user_turns.size() == 4);
  CHECK(bundle.user_turns[0].rfind("Given the following text, list the categories.", 0) == 0);
  CHECK(bundle.user_turns[0].find("['menu', 'service'") != std::string::npos);
  CHECK(bundle.user_turns[0].find("\"Good value.\"") != std::string::npos);
  CHECK(bundle.user_turns[1].rfind("List all word sequences that denote or link", 0) == 0);
  CHECK(bundle.user_turns[2].rfind("List all word sequences that denote an aspect term", 0) == 0);
  CHECK(bundle.user_turns[3].rfind("Lastly, please provide one Python type list", 0) == 0);
}

TEST_CASE("fewshot prompt regenerates the golden transcript byte for byte") {
  std::vector<FewshotExample> examples = {
      {"Service was wonderful;", {{"SERVICE#GENERAL", Polarity::positive}}},
      {"My mom originally introduced me to this place, but even she (being Indian) feels the "
       "food can be somewhat over the top spicy and far too oily.",
       {{"FOOD#QUALITY", Polarity::negative}}},
  };
  auto bundle = build_fewshot(order_of("AOC"), "Worst Service I Ever Had", restaurant16(),
                              "restaurant", examples);
  CHECK(bundle.system == system_instruction());
  CHECK(bundle.mode == PromptMode::fewshot);
  REQUIRE(bundle.user_turns.size() == 1);
  CHECK(bundle.user_turns[0] == testutil::fixture_text("prompts/fewshot_aoc_restaurant16.txt"));
}

TEST_CASE("fewshot step bullet tracks where categories and opinions sit in the chain") {
  std::vector<FewshotExample> examples = {{"Nice.", {{"food", Polarity::positive}}}};
  auto coa = build_fewshot(order_of("COA"), "Meh.", restaurant_v1(), "restaurant", examples);
  CHECK(coa.user_turns[0].find("derive from step 1 Categories in COT") != std::string::npos);
  CHECK(coa.user_turns[0].find("based on step 2 the extracted Opinions.") != std::string::npos);
  // The trailing open slot names the first chain element.
  const std::string& turn = coa.user_turns[0];
  CHECK(turn.substr(turn.size() - std::string("BEGIN COT\n\nCategories: ...").size()) ==
        "BEGIN COT\n\nCategories: ...");
  // One example here: bullet mention, instruction slots, example, final slot.
  CHECK(count_occurrences(turn, "BEGIN COT") == 4);
  CHECK(count_occurrences(turn, "END COT") == 5);  // plus two closing reminders
}

TEST_CASE("prompt builders validate their inputs") {
  CategorySchema empty;
  CHECK_THROWS_AS(build_enumerated(order_of("ACO"), "x", empty, "restaurant"), ConfigError);
  CHECK_THROWS_AS(build_multihop(order_of("ACO"), "x", empty, "restaurant"), ConfigError);
  std::vector<FewshotExample> none;
  CHECK_THROWS_AS(build_fewshot(order_of("ACO"), "x", restaurant_v1(), "restaurant", none),
                  ConfigError);
}

TEST_CASE("schema shuffling is a seeded permutation") {
  auto schema = restaurant_v1();
  auto a = shuffled_schema(schema, 7);
  auto b = shuffled_schema(schema, 7);
  CHECK(a.labels == b.labels);
  CHECK(a.domain_name == schema.domain_name);

  auto sorted_labels = [](CategorySchema s) {
    std::sort(s.labels.begin(), s.labels.end());
    return s.labels;
  };
  CHECK(sorted_labels(a) == sorted_labels(schema));

  // Distinct seeds give distinct orders for this 8-label schema.
  bool any_differs = false;
  for (std::uint64_t seed = 0; seed < 4 && !any_differs; ++seed)
    any_differs = shuffled_schema(schema, seed).labels != a.labels;
  CHECK(any_differs);

  // A single label is a fixed point.
  auto one = CategorySchema::make({"solo"}, "d");
  CHECK(shuffled_schema(one, 123).labels == std::vector<std::string>{"solo"});
}
