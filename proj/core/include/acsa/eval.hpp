#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acsa/domain.hpp"

namespace acsa {

struct MicroCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;

    MicroCounts& operator+=(const MicroCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    double precision() const;
    double recall() const;
    double f1() const;

    friend bool operator==(const MicroCounts&, const MicroCounts&) = default;
};

/// Exact (category, polarity) matching after deduplication.
MicroCounts score_instance(const PairList& pred, const PairList& gold);

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Micro average: counts are summed globally before the division.
PRF score_dataset(std::span<const MicroCounts> counts);

/// Number of categories predicted with two or more distinct polarities.
int count_conflicts(const PairList& pred);

/// Spearman rank correlation with average ranks for ties (fractional
/// ranks, then Pearson on the ranks). Requires two equal-length
/// sequences of at least 2 finite values (throws DataError otherwise);
/// returns nullopt when either sequence is constant, where the
/// correlation is undefined.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationReport {
    std::optional<double> rho_mean_confidence;  // mean agent confidence vs F1
    std::optional<double> rho_variance;         // confidence variance vs F1
    std::size_t n_instances = 0;
};

CorrelationReport confidence_correlation(std::span<const double> mean_confidence,
                                         std::span<const double> variance,
                                         std::span<const double> f1);

/// One row of the cross-model comparison grid; values are F1 in percent,
/// nullopt renders as an em dash.
struct GridRow {
    std::string label;
    std::string group;  // "baseline", "technique", "agent"
    std::vector<std::optional<double>> values;
};

struct ComparisonTable {
    std::vector<std::string> columns;
    std::vector<GridRow> rows;
    /// podium[r][c]: 1, 2 or 3 for the top three values of column c, else 0.
    std::vector<std::vector<int>> podium;
};

/// Ranks each column independently; ties take the earlier row.
ComparisonTable make_comparison_table(std::vector<std::string> columns, std::vector<GridRow> rows);

std::string render_table_csv(const ComparisonTable& table);
std::string render_table_text(const ComparisonTable& table);

struct PairCountSummary {
    double mean_predicted = 0.0;  // joined-agent pairs per instance
    double mean_gold = 0.0;
    double ratio = 0.0;  // predicted over gold; 0 when gold mean is 0
    bool flagged = false;
};

/// Flags over-prediction when the joined mean exceeds flag_ratio times
/// the gold mean.
PairCountSummary pair_count_summary(std::span<const std::size_t> joined_sizes,
                                    std::span<const std::size_t> gold_sizes,
                                    double flag_ratio = 2.0);

}  // namespace acsa
