#include "acsa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "acsa/errors.hpp"

namespace acsa {

double MicroCounts::precision() const {
    long long denom = tp + fp;
    return denom == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(denom);
}

double MicroCounts::recall() const {
    long long denom = tp + fn;
    return denom == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(denom);
}

double MicroCounts::f1() const {
    double p = precision();
    double r = recall();
    return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

namespace {

std::set<std::pair<std::string, std::string>> as_set(const PairList& list) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& p : list) out.emplace(p.category, std::string(to_string(p.polarity)));
    return out;
}

}  // namespace

MicroCounts score_instance(const PairList& pred, const PairList& gold) {
    auto p = as_set(pred);
    auto g = as_set(gold);
    MicroCounts counts;
    for (const auto& item : p)
        g.count(item) ? ++counts.tp : ++counts.fp;
    for (const auto& item : g)
        if (!p.count(item)) ++counts.fn;
    return counts;
}

PRF score_dataset(std::span<const MicroCounts> counts) {
    MicroCounts total;
    for (const auto& c : counts) total += c;
    return PRF{total.precision(), total.recall(), total.f1()};
}

int count_conflicts(const PairList& pred) {
    std::map<std::string, std::set<Polarity>> polarities;
    for (const auto& p : pred) polarities[p.category].insert(p.polarity);
    int conflicts = 0;
    for (const auto& [category, set] : polarities)
        if (set.size() >= 2) ++conflicts;
    return conflicts;
}

namespace {

// Fractional ranks, 1-based; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> values) {
    std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw DataError("spearman: sequence lengths differ (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
    if (x.size() < 2) throw DataError("spearman: need at least 2 observations");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw DataError("spearman: non-finite value at index " + std::to_string(i));
    std::vector<double> rx = average_ranks(x);
    std::vector<double> ry = average_ranks(y);
    return pearson(rx, ry);
}

CorrelationReport confidence_correlation(std::span<const double> mean_confidence,
                                         std::span<const double> variance,
                                         std::span<const double> f1) {
    CorrelationReport report;
    report.n_instances = f1.size();
    if (f1.size() < 2) return report;  // undefined, not an error
    report.rho_mean_confidence = spearman(mean_confidence, f1);
    report.rho_variance = spearman(variance, f1);
    return report;
}

ComparisonTable make_comparison_table(std::vector<std::string> columns, std::vector<GridRow> rows) {
    for (const auto& row : rows)
        if (row.values.size() != columns.size())
            throw DataError("comparison table row '" + row.label + "' has " +
                            std::to_string(row.values.size()) + " values for " +
                            std::to_string(columns.size()) + " columns");
    ComparisonTable table;
    table.columns = std::move(columns);
    table.rows = std::move(rows);
    table.podium.assign(table.rows.size(), std::vector<int>(table.columns.size(), 0));
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        std::vector<std::size_t> present;
        for (std::size_t r = 0; r < table.rows.size(); ++r)
            if (table.rows[r].values[c]) present.push_back(r);
        std::stable_sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) {
            return *table.rows[a].values[c] > *table.rows[b].values[c];
        });
        for (std::size_t rank = 0; rank < present.size() && rank < 3; ++rank)
            table.podium[present[rank]][c] = static_cast<int>(rank) + 1;
    }
    return table;
}

namespace {

std::string format_value(const std::optional<double>& value, int podium, bool csv) {
    if (!value) return csv ? "" : "—";  // em dash for missing cells
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", *value);
    std::string out = buf;
    if (!csv) out += "%";
    if (podium > 0) out += csv ? "" : "[" + std::to_string(podium) + "]";
    return out;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string render_table_csv(const ComparisonTable& table) {
    std::ostringstream out;
    out << "row,group";
    for (const auto& c : table.columns) out << "," << csv_escape(c) << "," << csv_escape(c + " rank");
    out << "\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        out << csv_escape(row.label) << "," << csv_escape(row.group);
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            out << "," << format_value(row.values[c], 0, true) << ",";
            if (table.podium[r][c] > 0) out << table.podium[r][c];
        }
        out << "\n";
    }
    return out.str();
}

std::string render_table_text(const ComparisonTable& table) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"row"};
    for (const auto& c : table.columns) header.push_back(c);
    cells.push_back(header);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::vector<std::string> line{table.rows[r].label};
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            line.push_back(format_value(table.rows[r].values[c], table.podium[r][c], false));
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> widths(cells[0].size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) {
            // display width: the em dash is 3 bytes but 1 column
            std::size_t w = line[c] == "—" ? 1 : line[c].size();
            widths[c] = std::max(widths[c], w);
        }
    std::ostringstream out;
    for (std::size_t l = 0; l < cells.size(); ++l) {
        for (std::size_t c = 0; c < cells[l].size(); ++c) {
            std::size_t w = cells[l][c] == "—" ? 1 : cells[l][c].size();
            out << cells[l][c] << std::string(widths[c] - w, ' ');
            if (c + 1 < cells[l].size()) out << "  ";
        }
        out << "\n";
        if (l == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < widths.size(); ++c)
                total += widths[c] + (c + 1 < widths.size() ? 2 : 0);
            out << std::string(total, '-') << "\n";
        }
    }
    out << "[1] best in column, [2] second, [3] third\n";
    return out.str();
}

PairCountSummary pair_count_summary(std::span<const std::size_t> joined_sizes,
                                    std::span<const std::size_t> gold_sizes,
                                    double flag_ratio) {
    if (joined_sizes.size() != gold_sizes.size())
        throw DataError("pair_count_summary: size vectors differ in length");
    PairCountSummary summary;
    if (joined_sizes.empty()) return summary;
    double pred = 0.0, gold = 0.0;
    for (std::size_t s : joined_sizes) pred += static_cast<double>(s);
    for (std::size_t s : gold_sizes) gold += static_cast<double>(s);
    summary.mean_predicted = pred / static_cast<double>(joined_sizes.size());
    summary.mean_gold = gold / static_cast<double>(gold_sizes.size());
    summary.ratio = summary.mean_gold == 0.0 ? 0.0 : summary.mean_predicted / summary.mean_gold;
    summary.flagged = summary.mean_gold > 0.0 && summary.ratio > flag_ratio;
    return summary;
}

}  // namespace acsa
