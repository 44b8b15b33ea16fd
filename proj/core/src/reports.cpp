#include "acsa/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "acsa/aggregate.hpp"
#include "acsa/errors.hpp"

namespace acsa {

namespace {

using nlohmann::json;

std::string fmt(const char* spec, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, value);
    return buf;
}

std::string pct(double fraction) { return fmt("%.1f%%", fraction * 100.0); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

struct InstanceScore {
    MicroCounts counts;
    double f1 = 0.0;
    bool both_empty = false;
};

InstanceScore instance_score(const PairList& pred, const PairList& gold) {
    InstanceScore score;
    score.counts = score_instance(pred, gold);
    if (canonical_form(pred).empty() && canonical_form(gold).empty()) {
        score.f1 = 1.0;
        score.both_empty = true;
    } else {
        score.f1 = score.counts.f1();
    }
    return score;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

std::map<std::string, const Instance*> index_corpus(const Corpus& corpus) {
    std::map<std::string, const Instance*> by_id;
    for (const Instance& inst : corpus.instances)
        if (!by_id.emplace(inst.id, &inst).second)
            throw DataError("corpus has duplicate instance id \"" + inst.id + "\"");
    return by_id;
}

const PairList& gold_of(const std::map<std::string, const Instance*>& by_id,
                        const std::string& id, const char* what) {
    auto it = by_id.find(id);
    if (it == by_id.end())
        throw DataError(std::string(what) + " id \"" + id + "\" is not in the corpus");
    return it->second->gold;
}

}  // namespace

EvaluationResult evaluate_predictions(const PredictionSet& preds, const Corpus& corpus,
                                      const std::optional<std::string>& rundir,
                                      const std::string& out_dir) {
    if (preds.ids.size() != preds.predictions.size())
        throw DataError("prediction set is ragged");
    auto by_id = index_corpus(corpus);
    {
        std::set<std::string> seen;
        for (const std::string& id : preds.ids) {
            gold_of(by_id, id, "prediction");
            if (!seen.insert(id).second)
                throw DataError("duplicate prediction id \"" + id + "\"");
        }
    }

    EvaluationResult result;
    result.instances = preds.ids.size();
    std::vector<MicroCounts> counts;
    counts.reserve(preds.ids.size());
    std::ostringstream per_instance;
    per_instance << "id,n_pred,n_gold,tp,fp,fn,f1,conflicts,both_empty\n";
    for (std::size_t i = 0; i < preds.ids.size(); ++i) {
        const PairList& gold = gold_of(by_id, preds.ids[i], "prediction");
        const PairList& pred = preds.predictions[i];
        InstanceScore score = instance_score(pred, gold);
        counts.push_back(score.counts);
        result.totals += score.counts;
        const int conflicts = count_conflicts(pred);
        if (conflicts > 0) {
            result.conflict_pairs += conflicts;
            ++result.conflicted_instances;
        }
        if (canonical_form(pred).empty()) ++result.empty_predictions;
        if (score.both_empty) ++result.both_empty;
        per_instance << csv_field(preds.ids[i]) << ',' << canonical_form(pred).size() << ','
                     << canonical_form(gold).size() << ',' << score.counts.tp << ','
                     << score.counts.fp << ',' << score.counts.fn << ','
                     << fmt("%.6f", score.f1) << ',' << conflicts << ','
                     << (score.both_empty ? 1 : 0) << '\n';
    }
    result.overall = score_dataset(counts);

    if (rundir) {
        RunData run = load_run(*rundir);
        const std::size_t common = std::min(run.instance_ids.size(), preds.ids.size());
        for (std::size_t i = 0; i < common; ++i)
            if (run.instance_ids[i] != preds.ids[i])
                throw DataError("prediction id \"" + preds.ids[i] + "\" does not match run id \"" +
                                run.instance_ids[i] + "\" at row " + std::to_string(i));
        if (run.instance_ids.size() != preds.ids.size())
            throw DataError("run has " + std::to_string(run.instance_ids.size()) +
                            " instances but predictions have " + std::to_string(preds.ids.size()));

        std::vector<std::vector<MicroCounts>> agent_counts(run.agents.size());
        std::vector<MicroCounts> joined_counts;
        std::vector<std::size_t> joined_sizes, gold_sizes;
        for (std::size_t i = 0; i < run.instance_ids.size(); ++i) {
            const PairList& gold = gold_of(by_id, run.instance_ids[i], "run");
            for (std::size_t a = 0; a < run.agents.size(); ++a)
                agent_counts[a].push_back(
                    score_instance(pairs_of(run.lists[i][a]), gold));
            PairList joined = joined_agent(run.lists[i]);
            joined_counts.push_back(score_instance(joined, gold));
            joined_sizes.push_back(joined.size());
            gold_sizes.push_back(canonical_form(gold).size());
        }
        const PRF joined_prf = score_dataset(joined_counts);
        for (std::size_t a = 0; a < run.agents.size(); ++a) {
            const PRF agent_prf = score_dataset(agent_counts[a]);
            result.agent_scores.emplace_back(run.agents[a], agent_prf);
            if (joined_prf.recall + 1e-12 < agent_prf.recall)
                throw Error("joined-agent recall " + fmt("%.6f", joined_prf.recall) +
                            " fell below agent " + run.agents[a] + " recall " +
                            fmt("%.6f", agent_prf.recall) + "; union dominance violated");
        }
        result.pair_counts = pair_count_summary(joined_sizes, gold_sizes);

        std::ostringstream agents_csv;
        agents_csv << "agent,precision,recall,f1\n";
        for (const auto& [agent, prf] : result.agent_scores)
            agents_csv << agent << ',' << fmt("%.6f", prf.precision) << ','
                       << fmt("%.6f", prf.recall) << ',' << fmt("%.6f", prf.f1) << '\n';
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "agent_f1.csv", agents_csv.str());
    }

    json report = {{"technique", preds.technique},
                   {"dataset", preds.dataset},
                   {"model", preds.model},
                   {"instances", result.instances},
                   {"micro",
                    {{"precision", result.overall.precision},
                     {"recall", result.overall.recall},
                     {"f1", result.overall.f1}}},
                   {"counts",
                    {{"tp", result.totals.tp}, {"fp", result.totals.fp}, {"fn", result.totals.fn}}},
                   {"conflicts",
                    {{"pairs", result.conflict_pairs},
                     {"instances", result.conflicted_instances}}},
                   {"empty_predictions", result.empty_predictions},
                   {"both_empty", result.both_empty}};
    if (preds.alpha) report["alpha"] = *preds.alpha;
    if (preds.mu) report["mu"] = *preds.mu;
    if (preds.seed) report["seed"] = *preds.seed;
    if (preds.embedder) report["embedder"] = *preds.embedder;
    if (preds.agent) report["agent"] = *preds.agent;
    if (preds.resolve_conflicts) report["resolve_conflicts"] = true;
    if (preds.degraded_instances) report["degraded_instances"] = preds.degraded_instances;
    if (result.instances == 0) report["warning"] = "empty dataset";
    if (result.pair_counts) {
        report["pair_counts"] = {{"mean_predicted", result.pair_counts->mean_predicted},
                                 {"mean_gold", result.pair_counts->mean_gold},
                                 {"ratio", result.pair_counts->ratio},
                                 {"flagged", result.pair_counts->flagged}};
    }
    if (!result.agent_scores.empty()) {
        json agents = json::array();
        for (const auto& [agent, prf] : result.agent_scores)
            agents.push_back({{"agent", agent},
                              {"precision", prf.precision},
                              {"recall", prf.recall},
                              {"f1", prf.f1}});
        report["agents"] = std::move(agents);
    }

    std::ostringstream summary;
    summary << "technique " << preds.technique << " on " << preds.dataset << " (model "
            << preds.model << ")\n";
    if (result.instances == 0) summary << "warning: empty dataset\n";
    summary << "instances " << result.instances << "\n";
    summary << "micro-P " << pct(result.overall.precision) << "  micro-R "
            << pct(result.overall.recall) << "  micro-F1 " << pct(result.overall.f1) << "\n";
    summary << "predicted conflicts: " << result.conflict_pairs << " pair(s) across "
            << result.conflicted_instances << " instance(s)\n";
    summary << "empty predictions: " << result.empty_predictions << "\n";
    if (result.pair_counts) {
        summary << "joined agent: mean " << fmt("%.2f", result.pair_counts->mean_predicted)
                << " pairs vs gold " << fmt("%.2f", result.pair_counts->mean_gold) << " (ratio "
                << fmt("%.2f", result.pair_counts->ratio) << ")"
                << (result.pair_counts->flagged ? " [over-prediction]" : "") << "\n";
    }
    if (!result.agent_scores.empty()) {
        summary << "agent F1:";
        for (const auto& [agent, prf] : result.agent_scores)
            summary << " " << agent << " " << pct(prf.f1);
        summary << "\n";
    }

    std::filesystem::create_directories(out_dir);
    write_file(std::filesystem::path(out_dir) / "report.json", report.dump(2) + "\n");
    write_file(std::filesystem::path(out_dir) / "summary.txt", summary.str());
    write_file(std::filesystem::path(out_dir) / "per_instance.csv", per_instance.str());
    return result;
}

AnalysisResult analyze_run(const RunData& run, const Corpus& corpus, Technique technique,
                           const std::string& out_dir) {
    auto by_id = index_corpus(corpus);
    AggregateConfig config;
    config.technique = technique;
    PredictionSet preds = aggregate_run(run, config);

    AnalysisResult result;
    result.technique = std::string(to_string(technique));
    std::vector<double> means, variances, f1s;
    std::ostringstream csv;
    csv << "id,mean_confidence,variance,f1\n";
    for (std::size_t i = 0; i < run.instance_ids.size(); ++i) {
        const PairList& gold = gold_of(by_id, run.instance_ids[i], "run");
        const auto& lists = run.lists[i];
        double mean = 0.0;
        for (const ScoredList& list : lists) mean += list.list_confidence;
        mean /= static_cast<double>(lists.size());
        double variance = 0.0;
        for (const ScoredList& list : lists) {
            const double d = list.list_confidence - mean;
            variance += d * d;
        }
        variance /= static_cast<double>(lists.size());

        InstanceScore score = instance_score(preds.predictions[i], gold);
        if (score.both_empty) ++result.both_empty;
        means.push_back(mean);
        variances.push_back(variance);
        f1s.push_back(score.f1);
        csv << csv_field(run.instance_ids[i]) << ',' << fmt("%.9f", mean) << ','
            << fmt("%.9f", variance) << ',' << fmt("%.6f", score.f1) << '\n';
    }
    result.correlation = confidence_correlation(means, variances, f1s);

    json analysis = {{"technique", result.technique},
                     {"dataset", run.dataset},
                     {"model", run.model},
                     {"instances", run.instance_ids.size()},
                     {"agents", run.agents.size()},
                     {"both_empty", result.both_empty},
                     {"note",
                      "Variance measures agent disagreement, the opposite direction of "
                      "confidence; readers who want it as an uncertainty score flip its sign."}};
    analysis["rho_mean_confidence"] = result.correlation.rho_mean_confidence
                                          ? json(*result.correlation.rho_mean_confidence)
                                          : json(nullptr);
    analysis["rho_variance"] = result.correlation.rho_variance
                                   ? json(*result.correlation.rho_variance)
                                   : json(nullptr);

    std::filesystem::create_directories(out_dir);
    write_file(std::filesystem::path(out_dir) / "analysis.json", analysis.dump(2) + "\n");
    write_file(std::filesystem::path(out_dir) / "analysis.csv", csv.str());
    return result;
}

ComparisonTable render_grid_file(const std::string& grid_path, const std::string& out_dir) {
    std::ifstream in(grid_path);
    if (!in) throw DataError("cannot open grid " + grid_path);
    json grid;
    try {
        grid = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("grid " + grid_path + ": " + e.what());
    }
    std::vector<std::string> columns;
    std::vector<GridRow> rows;
    try {
        columns = grid.at("columns").get<std::vector<std::string>>();
        for (const json& r : grid.at("rows")) {
            GridRow row;
            row.label = r.at("label").get<std::string>();
            row.group = r.value("group", std::string{});
            for (const json& v : r.at("values")) {
                if (v.is_null())
                    row.values.push_back(std::nullopt);
                else
                    row.values.push_back(v.get<double>());
            }
            rows.push_back(std::move(row));
        }
    } catch (const json::exception& e) {
        throw DataError("grid " + grid_path + ": " + e.what());
    }
    ComparisonTable table = make_comparison_table(std::move(columns), std::move(rows));
    std::filesystem::create_directories(out_dir);
    write_file(std::filesystem::path(out_dir) / "table.csv", render_table_csv(table));
    write_file(std::filesystem::path(out_dir) / "table.txt", render_table_text(table));
    return table;
}

}  // namespace acsa
