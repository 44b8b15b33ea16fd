// Acceptance gate: one numbered criterion per check, each printing a single
// [PASS] or [FAIL] line. Gating criteria decide the exit code; the live smoke
// is logged only. Run through ctest or directly.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "acsa/aggregate.hpp"
#include "acsa/datasets.hpp"
#include "acsa/domain.hpp"
#include "acsa/errors.hpp"
#include "acsa/eval.hpp"
#include "acsa/io.hpp"
#include "acsa/kmeans.hpp"
#include "acsa/llm.hpp"
#include "acsa/mock_backend.hpp"
#include "acsa/parse.hpp"
#include "acsa/prompts.hpp"
#include "acsa/reports.hpp"
#include "acsa/runner.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace acsa;
using nlohmann::json;

namespace {

// Tolerances. Hand-derived rationals are checked tightly; serialized report
// floats allow for the round trip through text; the k-means objective gets
// room for accumulation jitter only.
constexpr double kRationalTol = 1e-12;
constexpr double kReportTol = 1e-9;
constexpr double kTraceSlack = 1e-9;
constexpr double kRecallSlack = 1e-12;
constexpr double kAggregationBudgetSeconds = 10.0;
constexpr double kPipelineBudgetSeconds = 5.0;

const std::vector<std::string> kAgentCodes = {"ACO", "AOC", "CAO", "COA", "OAC", "OCA"};
const Polarity kPolarities[3] = {Polarity::negative, Polarity::neutral, Polarity::positive};

std::string g_note;  // extra line printed under the current criterion

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

std::string fmt(double value, int digits = 6) {
  std::ostringstream out;
  out.precision(digits);
  out << std::fixed << value;
  return out.str();
}

std::filesystem::path e2e(const std::string& relative) {
  return testutil::fixtures_dir() / "e2e" / relative;
}

// ---------------------------------------------------------------------------
// Shared synthetic data.

ScoredList random_list(std::mt19937_64& rng, const std::vector<std::string>& categories,
                       const std::string& agent, int max_pairs = 5) {
  std::vector<ScoredPair> pairs;
  int count = static_cast<int>(rng() % static_cast<std::uint64_t>(max_pairs + 1));
  for (int i = 0; i < count; ++i) {
    // A coarse dyadic grid keeps confidence ties frequent and exact, so the
    // tie-breaking rules are genuinely exercised.
    double conf = static_cast<double>(1 + rng() % 8) / 8.0;
    pairs.push_back(testutil::make_sp(categories[rng() % categories.size()],
                                      kPolarities[rng() % 3], conf, agent));
  }
  return testutil::make_list(std::move(pairs));
}

PairList random_gold(std::mt19937_64& rng, const std::vector<std::string>& categories,
                     int max_pairs = 3) {
  PairList gold;
  int count = static_cast<int>(rng() % static_cast<std::uint64_t>(max_pairs + 1));
  for (int i = 0; i < count; ++i)
    gold.push_back({categories[rng() % categories.size()], kPolarities[rng() % 3]});
  return gold;
}

// ---------------------------------------------------------------------------
// 1. Every aggregation technique matches a brute-force oracle on randomized
//    synthetic instances, including an exhaustive partition search for the
//    clustered technique.

void criterion_aggregation() {
  auto start = std::chrono::steady_clock::now();
  testutil::StubEmbedder stub;
  const std::vector<std::string> vocab = stub.vocabulary();
  std::mt19937_64 rng(20260822);

  int instances = 0;
  int partition_searches = 0;
  int unique_optima = 0;

  for (int chunk = 0; chunk < 10; ++chunk) {
    const int n_agents = 1 + static_cast<int>(rng() % 6);
    std::vector<std::vector<ScoredList>> runs;
    runs.reserve(50);

    for (int inst = 0; inst < 50; ++inst, ++instances) {
      std::vector<ScoredList> lists;
      for (int a = 0; a < n_agents; ++a) lists.push_back(random_list(rng, vocab, kAgentCodes[a]));
      const std::string tag = "instance " + std::to_string(instances);

      require(highest_probability_list(lists) == oracle::highest_prob_list(lists),
              tag + ": highest probability list diverges from the oracle");
      require(lowest_probability_list(lists) == oracle::lowest_prob_list(lists),
              tag + ": lowest probability list diverges from the oracle");
      require(most_common_list(lists) == oracle::most_common_list(lists),
              tag + ": most common list diverges from the oracle");
      require(joined_agent(lists) == oracle::joined(lists),
              tag + ": joined agent diverges from the oracle");

      for (int n : {0, 1, 2, 3, 5})
        for (bool resolve : {false, true})
          require(highest_probability_pairs(lists, n, resolve) == oracle::top_pairs(lists, n, resolve),
                  tag + ": top-" + std::to_string(n) + " pairs diverge from the oracle");

      auto pool = pooled_unique_pairs(lists);
      std::set<std::string> distinct;
      for (const auto& sp : pool) distinct.insert(sp.pair.category);
      const int k = 1 + static_cast<int>(rng() % 3);
      auto clustered = clustered_pairs(lists, k, stub, rng());
      require(!clustered.embedder_failed, tag + ": stub embedder unexpectedly failed");

      if (pool.empty()) {
        require(clustered.pairs.empty(), tag + ": clustered output from an empty pool");
      } else if (static_cast<int>(distinct.size()) <= k) {
        // Each category is its own cluster: the expected output is the first
        // pooled pair per category, in pool order.
        PairList expected;
        std::set<std::string> taken;
        for (const auto& sp : pool)
          if (taken.insert(sp.pair.category).second) expected.push_back(sp.pair);
        require(clustered.pairs == expected,
                tag + ": clustered shortcut disagrees with per-category best pairs");
      } else {
        std::vector<std::vector<double>> points;
        for (const auto& sp : pool) points.push_back({stub.point(sp.pair.category)});
        auto optima = oracle::clustered_optima(pool, points, k);
        require(!optima.empty(), tag + ": partition search found no optimum");
        auto canon = canonical_form(clustered.pairs);
        require(std::find(optima.begin(), optima.end(), canon) != optima.end(),
                tag + ": clustered result is not an SSE-optimal partition for k=" +
                    std::to_string(k));
        ++partition_searches;
        if (optima.size() == 1) ++unique_optima;
      }
      runs.push_back(std::move(lists));
    }

    std::vector<std::string> agents(kAgentCodes.begin(), kAgentCodes.begin() + n_agents);
    require(most_confident_agent(runs, agents).agent_index == oracle::most_confident_agent(runs),
            "chunk " + std::to_string(chunk) + ": most confident agent diverges from the oracle");
  }

  require(instances == 500, "expected 500 synthetic instances");
  require(partition_searches > 0, "the exhaustive partition search was never exercised");
  require(unique_optima > 0, "no instance had a unique clustering optimum");

  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(seconds < kAggregationBudgetSeconds,
          "500 oracle comparisons took " + fmt(seconds, 2) + "s, budget " +
              fmt(kAggregationBudgetSeconds, 0) + "s");
  g_note = "500 instances, " + std::to_string(partition_searches) + " partition searches (" +
           std::to_string(unique_optima) + " unique optima), " + fmt(seconds, 2) + "s";
}

// ---------------------------------------------------------------------------
// 2. Pair-count estimators: the fixed-alpha interpolation reproduces the
//    rounded per-instance mean at alpha=1 and the dataset median at alpha=0,
//    and the mean/max policies match a brute-force group reduce.

void criterion_estimators() {
  std::mt19937_64 rng(7);
  const std::vector<std::string> vocab = {"c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7"};

  for (int fixture = 0; fixture < 200; ++fixture) {
    const int n_instances = 3 + static_cast<int>(rng() % 6);
    const int n_agents = 2 + static_cast<int>(rng() % 5);
    std::vector<std::vector<ScoredList>> runs;
    std::vector<double> counts;
    for (int i = 0; i < n_instances; ++i) {
      std::vector<ScoredList> lists;
      for (int a = 0; a < n_agents; ++a) {
        lists.push_back(random_list(rng, vocab, kAgentCodes[a % 6]));
        counts.push_back(static_cast<double>(lists.back().pairs.size()));
      }
      runs.push_back(std::move(lists));
    }

    const double mu = median_pair_count(runs);
    std::sort(counts.begin(), counts.end());
    const std::size_t m = counts.size();
    const double expected_mu =
        m % 2 == 1 ? counts[m / 2] : (counts[m / 2 - 1] + counts[m / 2]) / 2.0;
    require(mu == expected_mu, "fixture " + std::to_string(fixture) + ": dataset median is " +
                                   fmt(mu) + ", expected " + fmt(expected_mu));

    const std::string tag = "fixture " + std::to_string(fixture);
    for (const auto& lists : runs) {
      double mean = 0.0;
      for (const auto& list : lists) mean += static_cast<double>(list.pairs.size());
      mean /= static_cast<double>(lists.size());

      AlphaPolicy one{AlphaPolicy::Kind::alpha, 1.0};
      require(estimate_n(lists, mu, one) == static_cast<int>(std::llround(mean)),
              tag + ": alpha=1 is not the rounded per-instance mean");

      AlphaPolicy zero{AlphaPolicy::Kind::alpha, 0.0};
      require(estimate_n(lists, mu, zero) == static_cast<int>(std::llround(mu)),
              tag + ": alpha=0 is not the rounded dataset median");

      AlphaPolicy mixed{AlphaPolicy::Kind::alpha, static_cast<double>(rng() % 101) / 100.0};
      const double blended = mixed.alpha * mean + (1.0 - mixed.alpha) * mu;
      require(estimate_n(lists, mu, mixed) == static_cast<int>(std::llround(blended)),
              tag + ": alpha=" + fmt(mixed.alpha, 2) + " does not round the interpolation");
      require(estimate_n(lists, mu, mixed) == oracle::estimate_n(lists, mu, mixed),
              tag + ": fixed-alpha estimate diverges from the oracle");

      for (AlphaPolicy::Kind kind : {AlphaPolicy::Kind::mean, AlphaPolicy::Kind::max}) {
        AlphaPolicy policy;
        policy.kind = kind;
        require(estimate_n(lists, mu, policy) == oracle::estimate_n(lists, mu, policy),
                tag + ": " + policy.to_string() + " policy diverges from the group-reduce oracle");
      }
    }
  }
  g_note = "200 fixtures, policies alpha/mean/max";
}

// ---------------------------------------------------------------------------
// 3. Micro-F1 equals the set-arithmetic oracle, including the worked
//    two-predictions-one-gold example at exactly 2/3.

void criterion_micro_f1() {
  PairList pred = {{"food", Polarity::positive}, {"service", Polarity::negative}};
  PairList gold = {{"food", Polarity::positive}};
  MicroCounts worked = score_instance(pred, gold);
  require(worked.tp == 1 && worked.fp == 1 && worked.fn == 0,
          "worked example counts are not tp=1 fp=1 fn=0");
  require(std::abs(worked.f1() - 2.0 / 3.0) <= kRationalTol,
          "worked example micro-F1 is " + fmt(worked.f1(), 12) + ", expected 2/3");

  std::mt19937_64 rng(3);
  const std::vector<std::string> vocab = {"c0", "c1", "c2", "c3"};
  std::vector<MicroCounts> per_instance;
  MicroCounts totals;
  for (int fixture = 0; fixture < 1000; ++fixture) {
    PairList p = random_gold(rng, vocab, 5);
    PairList g = random_gold(rng, vocab, 5);
    MicroCounts got = score_instance(p, g);
    MicroCounts want = oracle::micro(p, g);
    require(got == want, "fixture " + std::to_string(fixture) + ": counts (" +
                             std::to_string(got.tp) + "," + std::to_string(got.fp) + "," +
                             std::to_string(got.fn) + ") diverge from the set oracle (" +
                             std::to_string(want.tp) + "," + std::to_string(want.fp) + "," +
                             std::to_string(want.fn) + ")");
    per_instance.push_back(got);
    totals += got;
  }

  PRF prf = score_dataset(per_instance);
  const double tp = static_cast<double>(totals.tp);
  const double p = totals.tp + totals.fp > 0 ? tp / static_cast<double>(totals.tp + totals.fp) : 0.0;
  const double r = totals.tp + totals.fn > 0 ? tp / static_cast<double>(totals.tp + totals.fn) : 0.0;
  const double f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  require(std::abs(prf.precision - p) <= kRationalTol, "dataset precision is not micro-averaged");
  require(std::abs(prf.recall - r) <= kRationalTol, "dataset recall is not micro-averaged");
  require(std::abs(prf.f1 - f1) <= kRationalTol, "dataset F1 is not micro-averaged");
  g_note = "1000 fixtures, worked example f1 = " + fmt(worked.f1(), 12);
}

// ---------------------------------------------------------------------------
// 4. Similarity and category mapping: the pinned 8/9 ratio, and mapping is
//    total, schema-closed and argmax-consistent on fuzzed inputs.

void criterion_similarity() {
  require(std::abs(similarity("foood", "food") - 8.0 / 9.0) <= kRationalTol,
          "similarity(\"foood\", \"food\") is " + fmt(similarity("foood", "food"), 12) +
              ", expected 8/9");
  require(std::abs(oracle::similarity("foood", "food") - 8.0 / 9.0) <= kRationalTol,
          "oracle similarity disagrees on the pinned 8/9 example");

  auto fold = [](std::string s) {
    for (char& c : s)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
  };

  const std::vector<std::string> label_pool = {
      "food",           "FOOD#QUALITY",        "service",       "battery life",
      "Design_Features", "price",              "staff",         "anecdotes/miscellaneous"};
  const std::string charset = "abcdefgsrvFOOD#_ /-013.";
  std::mt19937_64 rng(11);

  for (int fixture = 0; fixture < 10000; ++fixture) {
    const std::size_t n_labels = 3 + rng() % 6;
    std::vector<std::string> labels(label_pool.begin(), label_pool.begin() + n_labels);
    auto schema = CategorySchema::make(labels, "fuzz");

    std::string raw;
    const std::size_t len = rng() % 13;
    for (std::size_t i = 0; i < len; ++i) raw += charset[rng() % charset.size()];

    auto [label, ratio] = map_category(raw, schema);
    require(std::find(labels.begin(), labels.end(), label) != labels.end(),
            "fixture " + std::to_string(fixture) + ": mapped \"" + raw +
                "\" outside the schema to \"" + label + "\"");
    require(ratio >= 0.0 && ratio <= 1.0,
            "fixture " + std::to_string(fixture) + ": ratio " + fmt(ratio) + " out of range");

    // Independent argmax over the case-folded pairings; the first label
    // achieving the best ratio must win, bit for bit.
    double best = -1.0;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      double s = oracle::similarity(fold(raw), fold(labels[i]));
      if (s > best) {
        best = s;
        best_index = i;
      }
    }
    require(label == labels[best_index],
            "fixture " + std::to_string(fixture) + ": \"" + raw + "\" mapped to \"" + label +
                "\", oracle argmax is \"" + labels[best_index] + "\"");
    require(ratio == best, "fixture " + std::to_string(fixture) + ": ratio " + fmt(ratio, 12) +
                               " differs from the oracle maximum " + fmt(best, 12));
    require(std::abs(similarity(raw, labels[best_index]) - best) <= kRationalTol,
            "fixture " + std::to_string(fixture) + ": similarity diverges from the oracle");
  }
  g_note = "10000 fuzzed mappings, schema-closed and argmax-consistent";
}

// ---------------------------------------------------------------------------
// 5. Spearman: exactly +-1 on monotone data, and the tie-corrected value
//    matches the quadratic rank oracle on random tied samples.

void criterion_spearman() {
  std::mt19937_64 rng(13);
  for (std::size_t n : {2u, 3u, 10u, 41u}) {
    std::vector<double> x, up, down;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(static_cast<double>(i + 1));
      up.push_back(3.0 * static_cast<double>(i + 1) + 7.0);
      down.push_back(-2.0 * static_cast<double>(i + 1));
    }
    std::shuffle(x.begin(), x.end(), rng);
    std::vector<double> y_up, y_down;
    for (double v : x) {
      y_up.push_back(v * v);  // monotone on positive x
      y_down.push_back(-v);
    }
    auto rho_up = spearman(x, y_up);
    auto rho_down = spearman(x, y_down);
    require(rho_up.has_value() && *rho_up == 1.0,
            "monotone sample of " + std::to_string(n) + " is not exactly +1");
    require(rho_down.has_value() && *rho_down == -1.0,
            "antimonotone sample of " + std::to_string(n) + " is not exactly -1");
    (void)up;
    (void)down;
  }

  int defined = 0;
  for (int fixture = 0; fixture < 200; ++fixture) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      // Small integer ranges force heavy ties.
      x.push_back(static_cast<double>(rng() % 6));
      y.push_back(static_cast<double>(rng() % 6));
    }
    if (fixture % 40 == 0) std::fill(x.begin(), x.end(), 4.0);  // constant: undefined

    auto got = spearman(x, y);
    auto want = oracle::spearman(x, y);
    require(got.has_value() == want.has_value(),
            "fixture " + std::to_string(fixture) + ": definedness diverges from the oracle");
    if (got.has_value()) {
      require(std::abs(*got - *want) <= kRationalTol,
              "fixture " + std::to_string(fixture) + ": rho " + fmt(*got, 12) +
                  " vs oracle " + fmt(*want, 12));
      ++defined;
    }
  }
  require(defined > 100, "too few defined correlations to trust the tie sweep");
  g_note = "exact +-1 at n in {2,3,10,41}; " + std::to_string(defined) + "/200 tied samples defined";
}

// ---------------------------------------------------------------------------
// 6. The joined agent never loses recall to any single agent: checked on the
//    scripted mock run and as a per-instance superset property.

void criterion_joined_dominance() {
  testutil::TempDir tmp;
  RunConfig config;
  config.corpus_path = e2e("corpus.jsonl").string();
  config.rundir = tmp.str("run");
  auto manifest = read_manifest(e2e("corpus.jsonl.manifest.json").string());
  auto corpus = read_corpus_jsonl(config.corpus_path);
  execute_run(config, MockBackend::from_script_file(e2e("mock_script.json").string()), manifest,
              corpus);

  auto run = load_run(config.rundir);
  AggregateConfig agg;
  agg.technique = Technique::joined;
  auto joined_preds = aggregate_run(run, agg);
  auto result = evaluate_predictions(joined_preds, corpus, config.rundir, tmp.str("eval"));
  require(result.agent_scores.size() == 6, "expected six per-agent score rows");
  for (const auto& [agent, prf] : result.agent_scores)
    require(result.overall.recall >= prf.recall - kRecallSlack,
            "joined recall " + fmt(result.overall.recall) + " fell below agent " + agent + " at " +
                fmt(prf.recall));

  // Synthetic property: the joined prediction matches at least every pair any
  // single agent matched, so tp can only rise and fn only fall.
  std::mt19937_64 rng(17);
  const std::vector<std::string> vocab = {"c0", "c1", "c2", "c3", "c4", "c5"};
  for (int fixture = 0; fixture < 300; ++fixture) {
    std::vector<ScoredList> lists;
    for (int a = 0; a < 6; ++a) lists.push_back(random_list(rng, vocab, kAgentCodes[a]));
    PairList gold = random_gold(rng, vocab);
    MicroCounts joined = score_instance(joined_agent(lists), gold);
    for (int a = 0; a < 6; ++a) {
      MicroCounts agent = score_instance(pairs_of(lists[a]), gold);
      require(joined.tp >= agent.tp && joined.fn <= agent.fn,
              "fixture " + std::to_string(fixture) + ": agent " + kAgentCodes[a] +
                  " matched pairs the union missed");
    }
  }
  g_note = "mock run dominance over 6 agents; 300 synthetic union-superset instances";
}

// ---------------------------------------------------------------------------
// 7. k-means invariants: non-increasing objective, singleton clusters at
//    k = #points, and seed-stable clustering.

void criterion_kmeans() {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 39);
    const std::size_t dim = 1 + rng() % 4;
    const int k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(8, n)));
    std::vector<std::vector<double>> points;
    for (int i = 0; i < n; ++i) {
      std::vector<double> p;
      for (std::size_t d = 0; d < dim; ++d)
        p.push_back(static_cast<double>(rng() % 100000) / 10000.0);
      points.push_back(std::move(p));
    }

    KMeansOptions options;
    options.seed = rng();
    auto result = kmeans(points, k, options);
    const std::string tag = "trial " + std::to_string(trial);
    require(result.assignment.size() == static_cast<std::size_t>(n), tag + ": assignment size");
    for (int label : result.assignment)
      require(label >= 0 && label < k, tag + ": label " + std::to_string(label) + " out of range");
    require(!result.objective_trace.empty(), tag + ": empty objective trace");
    for (std::size_t i = 1; i < result.objective_trace.size(); ++i)
      require(result.objective_trace[i] <= result.objective_trace[i - 1] + kTraceSlack,
              tag + ": objective rose from " + fmt(result.objective_trace[i - 1], 9) + " to " +
                  fmt(result.objective_trace[i], 9));

    auto replay = kmeans(points, k, options);
    require(replay.assignment == result.assignment && replay.centroids == result.centroids,
            tag + ": the same seed produced a different clustering");
  }

  // Distinct points, one cluster each.
  std::vector<std::vector<double>> singles;
  for (int i = 0; i < 12; ++i) singles.push_back({1.5 * static_cast<double>(i), 0.25});
  std::shuffle(singles.begin(), singles.end(), rng);
  KMeansOptions options;
  options.seed = 5;
  auto result = kmeans(singles, 12, options);
  require(result.objective_trace.back() <= kRationalTol,
          "k = #points left a nonzero objective " + fmt(result.objective_trace.back(), 15));
  std::map<int, int> sizes;
  for (int label : result.assignment) ++sizes[label];
  require(sizes.size() == 12, "k = #points produced " + std::to_string(sizes.size()) + " clusters");
  for (const auto& [label, count] : sizes)
    require(count == 1, "cluster " + std::to_string(label) + " holds " + std::to_string(count) +
                            " points, expected a singleton");
  g_note = "100 random point sets, objective monotone, seed-stable";
}

// ---------------------------------------------------------------------------
// 8. The full pipeline, driven through the installed command-line binary
//    against the scripted mock backend, reproduces every golden prediction
//    file, report and analysis.

int run_cli(const std::string& args, const std::string& log) {
  const std::string command = "\"" ACSA_CLI_PATH "\" " + args + " >>\"" + log + "\" 2>&1";
  int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string log_tail(const std::string& log) {
  std::string text;
  try {
    text = read_text_file(log);
  } catch (const std::exception&) {
    return "(no log)";
  }
  if (text.size() > 500) text = "..." + text.substr(text.size() - 500);
  return text;
}

// Numbers present as integers on both sides must match exactly; any float
// comparison gets the given tolerance; everything else is compared exactly.
void require_same_json(const json& got, const json& want, double tol, const std::string& where) {
  if (want.is_object()) {
    require(got.is_object(), where + ": expected an object");
    require(got.size() == want.size(), where + ": object key sets differ");
    for (const auto& [key, value] : want.items()) {
      require(got.contains(key), where + ": missing key \"" + key + "\"");
      require_same_json(got.at(key), value, tol, where + "." + key);
    }
  } else if (want.is_array()) {
    require(got.is_array() && got.size() == want.size(), where + ": array shapes differ");
    for (std::size_t i = 0; i < want.size(); ++i)
      require_same_json(got.at(i), want.at(i), tol, where + "[" + std::to_string(i) + "]");
  } else if (want.is_number() && !want.is_number_integer()) {
    require(got.is_number(), where + ": expected a number");
    require(std::abs(got.get<double>() - want.get<double>()) <= tol,
            where + ": " + got.dump() + " vs " + want.dump());
  } else if (want.is_number_integer() && got.is_number() && !got.is_number_integer()) {
    require(std::abs(got.get<double>() - want.get<double>()) <= tol,
            where + ": " + got.dump() + " vs " + want.dump());
  } else {
    require(got == want, where + ": " + got.dump() + " vs " + want.dump());
  }
}

void require_same_predictions(const PredictionSet& got, const PredictionSet& want,
                              const std::string& name) {
  const std::string where = "predictions " + name;
  require(got.technique == want.technique, where + ": technique header differs");
  require(got.dataset == want.dataset, where + ": dataset header differs");
  require(got.model == want.model, where + ": model header differs");
  require(got.alpha == want.alpha, where + ": alpha header differs");
  require(got.seed == want.seed, where + ": seed header differs");
  require(got.embedder == want.embedder, where + ": embedder header differs");
  require(got.agent == want.agent, where + ": winning agent differs");
  require(got.resolve_conflicts == want.resolve_conflicts, where + ": resolve flag differs");
  require(got.degraded_instances == want.degraded_instances, where + ": degraded count differs");
  require(got.mu.has_value() == want.mu.has_value(), where + ": mu presence differs");
  if (want.mu)
    require(std::abs(*got.mu - *want.mu) <= kReportTol, where + ": mu differs");
  require(got.ids == want.ids, where + ": instance ids differ");
  require(got.predictions.size() == want.predictions.size(), where + ": instance count differs");
  for (std::size_t i = 0; i < want.predictions.size(); ++i)
    require(got.predictions[i] == want.predictions[i],
            where + ": pairs differ at " + got.ids[i]);
}

void criterion_pipeline() {
  auto start = std::chrono::steady_clock::now();
  testutil::TempDir tmp;
  const std::string log = tmp.str("cli.log");
  const std::string rundir = tmp.str("run");
  const std::string corpus = e2e("corpus.jsonl").string();

  require(run_cli("run --corpus \"" + corpus + "\" --backend \"" + e2e("backend.json").string() +
                      "\" --out \"" + rundir + "\"",
                  log) == 0,
          "run subcommand failed: " + log_tail(log));

  const std::vector<std::string> techniques = {
      "highest_prob_list",   "lowest_prob_list", "most_common_list", "highest_prob_pairs",
      "clustered_pairs",     "most_confident_agent", "joined"};

  for (const auto& name : techniques) {
    require(run_cli("aggregate --rundir \"" + rundir + "\" --technique " + name, log) == 0,
            "aggregate " + name + " failed: " + log_tail(log));
    auto got = read_predictions(rundir + "/predictions/" + name + ".jsonl");
    auto want = read_predictions(e2e("golden/" + name + ".jsonl").string());
    require_same_predictions(got, want, name);

    const std::string eval_dir = tmp.str("eval_" + name);
    require(run_cli("evaluate --predictions \"" + rundir + "/predictions/" + name +
                        ".jsonl\" --corpus \"" + corpus + "\" --rundir \"" + rundir +
                        "\" --out \"" + eval_dir + "\"",
                    log) == 0,
            "evaluate " + name + " failed: " + log_tail(log));
    auto got_report = json::parse(read_text_file(eval_dir + "/report.json"));
    auto want_report = json::parse(read_text_file(e2e("golden/report_" + name + ".json").string()));
    require_same_json(got_report, want_report, kReportTol, "report " + name);
  }

  const std::string analysis_dir = tmp.str("analysis");
  require(run_cli("analyze --rundir \"" + rundir + "\" --corpus \"" + corpus +
                      "\" --technique highest_prob_list --out \"" + analysis_dir + "\"",
                  log) == 0,
          "analyze failed: " + log_tail(log));
  auto got_analysis = json::parse(read_text_file(analysis_dir + "/analysis.json"));
  auto want_analysis =
      json::parse(read_text_file(e2e("golden/analysis_highest_prob_list.json").string()));
  require_same_json(got_analysis, want_analysis, kRationalTol, "analysis");

  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(seconds < kPipelineBudgetSeconds, "pipeline took " + fmt(seconds, 2) + "s, budget " +
                                                fmt(kPipelineBudgetSeconds, 0) + "s");
  g_note = "7 techniques, reports and analysis match the goldens, " + fmt(seconds, 2) + "s";
}

// ---------------------------------------------------------------------------
// 9. Ingestion: no kept instance carries a category conflict or an empty
//    gold set, the drop accounting adds up, and when the real source files
//    are provided the per-split sizes match the published counts.

void criterion_ingestion() {
  testutil::TempDir tmp;
  std::mt19937_64 rng(23);
  const char* categories[4] = {"comfort", "durability", "delivery", "style"};
  const char* sentiments[4] = {"positive", "negative", "neutral", "meh"};

  std::ostringstream jsonl;
  std::size_t total = 200;
  for (std::size_t i = 0; i < total; ++i) {
    json quads = json::array();
    const std::size_t n_quads = rng() % 4;
    for (std::size_t q = 0; q < n_quads; ++q) {
      const char* category = categories[rng() % 4];
      const char* sentiment = sentiments[rng() % (i % 5 == 0 ? 4 : 3)];
      quads.push_back({category, category, "cue", sentiment});
    }
    if (i % 7 == 0 && n_quads > 0) {
      // Engineered conflict: the first category again at another polarity.
      std::string category = quads[0][1];
      quads.push_back({category, category, "cue",
                       quads[0][3] == "positive" ? "negative" : "positive"});
    }
    json record = {{"id", "r" + std::to_string(i)},
                   {"text", "Review number " + std::to_string(i)},
                   {"quads", quads}};
    jsonl << record.dump() << "\n";
  }
  const std::string path = tmp.str("shoes.jsonl");
  write_text_file(path, jsonl.str());

  auto result = ingest_shoes(path, Split::test);
  for (const auto& instance : result.instances) {
    require(!instance.gold.empty(), instance.id + " was kept with an empty gold set");
    require(count_conflicts(instance.gold) == 0, instance.id + " was kept with a conflict");
    std::set<Pair> seen(instance.gold.begin(), instance.gold.end());
    require(seen.size() == instance.gold.size(), instance.id + " has duplicate gold pairs");
  }
  require(result.stats.kept == result.instances.size(), "kept count disagrees with instances");
  require(result.stats.kept + result.stats.dropped_conflicts + result.stats.dropped_empty +
                  result.stats.dropped_bad_polarity ==
              total,
          "drop accounting does not cover all records");
  require(result.stats.dropped_conflicts > 0 && result.stats.dropped_empty > 0 &&
              result.stats.dropped_bad_polarity > 0,
          "the synthetic corpus failed to exercise every drop reason");

  std::string note = "synthetic: " + std::to_string(result.stats.kept) + " kept, " +
                     std::to_string(result.stats.dropped_conflicts) + " conflicts, " +
                     std::to_string(result.stats.dropped_empty) + " empty, " +
                     std::to_string(result.stats.dropped_bad_polarity) + " bad polarity";

  const char* dir = std::getenv("ACSA_DATASETS_DIR");
  if (dir == nullptr) {
    g_note = note + "; real source files not provided, set ACSA_DATASETS_DIR to check split sizes";
    return;
  }

  struct RealSource {
    const char* dataset;
    std::vector<std::string> stems;
    std::size_t expected;
  };
  const std::vector<RealSource> sources = {
      {"restaurant16", {"restaurant16_test.xml"}, 571},
      {"mams", {"mams_test.xml"}, 400},
      {"shoes", {"shoes_test.jsonl", "shoes_test.tsv"}, 125},
  };
  for (const auto& source : sources) {
    std::string found;
    for (const auto& stem : source.stems) {
      auto candidate = std::filesystem::path(dir) / stem;
      if (std::filesystem::exists(candidate)) {
        found = candidate.string();
        break;
      }
    }
    if (found.empty()) {
      note += "; " + std::string(source.dataset) + " source file missing, skipped";
      continue;
    }
    const DatasetInfo* info = find_dataset(source.dataset);
    require(info != nullptr, std::string("unknown dataset ") + source.dataset);
    auto outcome = ingest_dataset(*info, {{Split::test, found}});
    std::size_t n_test = 0;
    for (const auto& instance : outcome.corpus.instances) {
      if (instance.split == Split::test) ++n_test;
      require(count_conflicts(instance.gold) == 0,
              std::string(source.dataset) + ": kept instance " + instance.id + " has a conflict");
      require(!instance.gold.empty(),
              std::string(source.dataset) + ": kept instance " + instance.id + " is empty");
    }
    require(n_test == source.expected,
            std::string(source.dataset) + " test split has " + std::to_string(n_test) +
                " instances, expected " + std::to_string(source.expected));
    note += "; " + std::string(source.dataset) + " test = " + std::to_string(n_test);
  }
  g_note = note;
}

// ---------------------------------------------------------------------------
// 10. The prompt builders regenerate every golden transcript byte for byte
//     (fixture files carry one trailing newline the builders do not emit).

void criterion_prompt_goldens() {
  auto match = [](const std::string& text, const std::string& relative) {
    const std::string stored = testutil::fixture_text(relative);
    require(text == stored, relative + " no longer regenerates byte for byte");
    const std::string raw =
        read_text_file((testutil::fixtures_dir() / relative).string());
    require(raw == text + "\n", relative + " lost its trailing-newline convention");
  };

  match(system_instruction(), "prompts/system_instruction.txt");

  const std::string review =
      "We went again and sat at the bar this time, I had 5 pints of guinness and not one "
      "buy-back, I ordered a basket of onion rings and there were about 5 in the basket, the "
      "rest was filled with crumbs, the chili was not even edible.";
  auto restaurant_v1 = CategorySchema::make(
      {"menu", "service", "price", "ambience", "place", "staff", "miscellaneous", "food"},
      "restaurant");
  auto aoc = ElementOrder::from_code("AOC");
  require(aoc.has_value(), "order AOC is unknown");

  auto enumerated = build_enumerated(*aoc, review, restaurant_v1, "restaurant");
  require(enumerated.user_turns.size() == 1, "enumerated bundle is not a single turn");
  match(enumerated.user_turns[0], "prompts/enumerated_aoc_restaurant.txt");

  auto multihop = build_multihop(*aoc, review, restaurant_v1, "restaurant");
  require(multihop.user_turns.size() == 4, "multihop bundle is not four turns");
  for (std::size_t i = 0; i < 4; ++i)
    match(multihop.user_turns[i], "prompts/multihop_turn" + std::to_string(i + 1) + ".txt");

  auto restaurant16 = CategorySchema::make(
      {"FOOD#QUALITY", "AMBIENCE#GENERAL", "SERVICE#GENERAL", "RESTAURANT#PRICES",
       "DRINKS#QUALITY", "FOOD#PRICES", "RESTAURANT#MISCELLANEOUS", "LOCATION#GENERAL",
       "DRINKS#STYLE_OPTIONS", "DRINKS#PRICES", "FOOD#STYLE_OPTIONS", "RESTAURANT#GENERAL"},
      "restaurant");
  std::vector<FewshotExample> examples = {
      {"Service was wonderful;", {{"SERVICE#GENERAL", Polarity::positive}}},
      {"My mom originally introduced me to this place, but even she (being Indian) feels the "
       "food can be somewhat over the top spicy and far too oily.",
       {{"FOOD#QUALITY", Polarity::negative}}},
  };
  auto fewshot =
      build_fewshot(*aoc, "Worst Service I Ever Had", restaurant16, "restaurant", examples);
  require(fewshot.user_turns.size() == 1, "fewshot bundle is not a single turn");
  match(fewshot.user_turns[0], "prompts/fewshot_aoc_restaurant16.txt");

  g_note = "system + enumerated + 4 multihop turns + fewshot";
}

// ---------------------------------------------------------------------------
// 11. Live endpoint smoke: runs only when an endpoint, a model and the real
//     test set are provided; the best single-agent micro-F1 is logged against
//     a 0.50 plausibility band, never asserted.

void criterion_live_smoke() {
  const char* endpoint = std::getenv("ACSA_ENDPOINT");
  const char* model = std::getenv("ACSA_SMOKE_MODEL");
  const char* data_dir = std::getenv("ACSA_DATASETS_DIR");
  if (endpoint == nullptr || model == nullptr || data_dir == nullptr) {
    g_note = "skipped: set ACSA_ENDPOINT, ACSA_SMOKE_MODEL and ACSA_DATASETS_DIR to run it";
    return;
  }
  auto source = std::filesystem::path(data_dir) / "restaurant16_test.xml";
  if (!std::filesystem::exists(source)) {
    g_note = "skipped: " + source.string() + " not found";
    return;
  }

  try {
    const DatasetInfo* info = find_dataset("restaurant16");
    require(info != nullptr, "restaurant16 missing from the registry");
    auto outcome = ingest_dataset(*info, {{Split::test, source.string()}});

    std::size_t n = 25;
    if (const char* raw = std::getenv("ACSA_SMOKE_N")) n = std::stoul(raw);
    if (outcome.corpus.instances.size() > n) outcome.corpus.instances.resize(n);

    testutil::TempDir tmp;
    const std::string corpus_path = tmp.str("corpus.jsonl");
    write_corpus_jsonl(outcome.corpus, corpus_path);

    RunConfig config;
    config.corpus_path = corpus_path;
    config.rundir = tmp.str("run");
    config.model = model;
    config.concurrency = 2;

    HttpBackendConfig http;
    http.base_url = endpoint;
    if (const char* key = std::getenv("ACSA_API_KEY")) http.api_key = key;

    execute_run(config, make_http_backend(http), outcome.manifest, outcome.corpus);
    auto run = load_run(config.rundir);
    AggregateConfig agg;
    agg.technique = Technique::joined;
    auto joined_preds = aggregate_run(run, agg);
    auto result =
        evaluate_predictions(joined_preds, outcome.corpus, config.rundir, tmp.str("eval"));

    double best = 0.0;
    std::string best_agent = "none";
    for (const auto& [agent, prf] : result.agent_scores)
      if (prf.f1 > best) {
        best = prf.f1;
        best_agent = agent;
      }
    g_note = "model " + std::string(model) + " on " +
             std::to_string(outcome.corpus.instances.size()) +
             " instances: best single-agent micro-F1 = " + fmt(best, 3) + " (" + best_agent +
             "), plausibility band >= 0.500" + (best >= 0.5 ? "" : ", BELOW BAND (logged only)");
  } catch (const std::exception& error) {
    g_note = std::string("smoke run errored (logged only): ") + error.what();
  }
}

struct Criterion {
  int number;
  const char* name;
  std::function<void()> check;
  bool gating;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "aggregation techniques match brute-force oracles", criterion_aggregation, true},
      {2, "pair-count estimators reproduce mean, median and group reduces", criterion_estimators,
       true},
      {3, "micro-F1 equals the set-arithmetic oracle", criterion_micro_f1, true},
      {4, "similarity and category mapping are exact, total and schema-closed",
       criterion_similarity, true},
      {5, "spearman is exactly +-1 on monotone data and tie-correct", criterion_spearman, true},
      {6, "the joined agent never loses recall to a single agent", criterion_joined_dominance,
       true},
      {7, "k-means objective is monotone, exhaustive at k = #points, seed-stable",
       criterion_kmeans, true},
      {8, "the mock pipeline reproduces every golden prediction and report", criterion_pipeline,
       true},
      {9, "ingestion keeps only conflict-free instances and matches split sizes",
       criterion_ingestion, true},
      {10, "prompt builders regenerate the golden transcripts", criterion_prompt_goldens, true},
      {11, "live endpoint smoke (logged, never gating)", criterion_live_smoke, false},
  };

  int gating_failures = 0;
  for (const auto& criterion : criteria) {
    g_note.clear();
    auto start = std::chrono::steady_clock::now();
    try {
      criterion.check();
      double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("[PASS] #%d %s (%.2fs)\n", criterion.number, criterion.name, seconds);
      if (!g_note.empty()) std::printf("       %s\n", g_note.c_str());
    } catch (const std::exception& error) {
      std::printf("[FAIL] #%d %s: %s\n", criterion.number, criterion.name, error.what());
      if (criterion.gating) ++gating_failures;
    }
    std::fflush(stdout);
  }

  if (gating_failures == 0) {
    std::printf("acceptance: all gating criteria hold\n");
  } else {
    std::printf("acceptance: %d gating criterion(s) failed\n", gating_failures);
  }
  return gating_failures == 0 ? 0 : 1;
}
