#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "acsa/eval.hpp"
#include "acsa/io.hpp"
#include "acsa/runner.hpp"

namespace acsa {

struct EvaluationResult {
    PRF overall;
    MicroCounts totals;
    std::size_t instances = 0;
    std::size_t empty_predictions = 0;
    std::size_t both_empty = 0;  // pred and gold both empty: F1 1 by convention
    int conflict_pairs = 0;      // summed count_conflicts over predictions
    std::size_t conflicted_instances = 0;
    std::optional<PairCountSummary> pair_counts;  // joined agent, needs the run
    std::vector<std::pair<std::string, PRF>> agent_scores;  // needs the run
};

/// Scores predictions against the corpus gold and writes report.json,
/// summary.txt and per_instance.csv under out_dir; with a run directory
/// it adds agent_f1.csv, the joined-agent pair-count summary, and
/// asserts the joined agent's recall dominates every single agent's.
/// Prediction ids must exist in the corpus and be unique; DataError
/// names the first offender.
EvaluationResult evaluate_predictions(const PredictionSet& preds, const Corpus& corpus,
                                      const std::optional<std::string>& rundir,
                                      const std::string& out_dir);

struct AnalysisResult {
    std::string technique;
    CorrelationReport correlation;
    std::size_t both_empty = 0;
};

/// Correlates each instance's mean and population variance of the agent
/// list confidences with its F1 under the designated technique; writes
/// analysis.json and analysis.csv under out_dir.
AnalysisResult analyze_run(const RunData& run, const Corpus& corpus, Technique technique,
                           const std::string& out_dir);

/// Reads a grid JSON {"columns": [...], "rows": [{"label", "group",
/// "values": [number|null, ...]}]}, ranks it, and writes table.csv and
/// table.txt under out_dir.
ComparisonTable render_grid_file(const std::string& grid_path, const std::string& out_dir);

}  // namespace acsa
