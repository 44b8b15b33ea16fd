#include "acsa/datasets.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "acsa/errors.hpp"

namespace acsa {

namespace {

using boost::property_tree::ptree;
using nlohmann::json;

std::string fold_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
    return out;
}

// Raw annotation before polarity parsing and filtering.
using RawPair = std::pair<std::string, std::string>;  // category, polarity string

enum class DropReason { none, bad_polarity, conflict, empty };

DropReason filter_gold(const std::vector<RawPair>& raw, PairList& gold) {
    gold.clear();
    for (const auto& [category, polarity] : raw) {
        auto parsed = parse_polarity(fold_ascii(polarity));
        if (!parsed) return DropReason::bad_polarity;
        Pair pair{category, *parsed};
        if (std::find(gold.begin(), gold.end(), pair) == gold.end()) gold.push_back(pair);
    }
    for (std::size_t i = 0; i < gold.size(); ++i)
        for (std::size_t j = i + 1; j < gold.size(); ++j)
            if (gold[i].category == gold[j].category) return DropReason::conflict;
    if (gold.empty()) return DropReason::empty;
    return DropReason::none;
}

void account(DropReason reason, IngestStats& stats) {
    switch (reason) {
        case DropReason::none: ++stats.kept; break;
        case DropReason::bad_polarity: ++stats.dropped_bad_polarity; break;
        case DropReason::conflict: ++stats.dropped_conflicts; break;
        case DropReason::empty: ++stats.dropped_empty; break;
    }
}

void note_categories(const PairList& gold, std::vector<std::string>& seen) {
    for (const Pair& p : gold)
        if (std::find(seen.begin(), seen.end(), p.category) == seen.end())
            seen.push_back(p.category);
}

ptree read_xml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    ptree pt;
    try {
        boost::property_tree::read_xml(in, pt);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw DataError(path + " line " + std::to_string(e.line()) + ": " + e.message());
    }
    return pt;
}

// Collects (category, polarity) attribute pairs from every child named
// element_name of the given annotations node.
std::vector<RawPair> attribute_pairs(const ptree& annotations, const std::string& element_name,
                                     const std::string& where) {
    std::vector<RawPair> raw;
    for (const auto& [name, node] : annotations) {
        if (name != element_name) continue;
        auto category = node.get_optional<std::string>("<xmlattr>.category");
        auto polarity = node.get_optional<std::string>("<xmlattr>.polarity");
        if (!category || !polarity)
            throw DataError(where + ": " + element_name + " lacks category or polarity");
        raw.emplace_back(*category, *polarity);
    }
    return raw;
}

void ingest_sentence(const std::string& id, const std::string& text,
                     const std::vector<RawPair>& raw, Split split, IngestResult& result) {
    PairList gold;
    DropReason reason = filter_gold(raw, gold);
    account(reason, result.stats);
    if (reason != DropReason::none) return;
    note_categories(gold, result.categories_seen);
    result.instances.push_back({id, text, std::move(gold), split});
}

}  // namespace

std::string_view to_string(Granularity g) {
    return g == Granularity::sentence ? "sentence" : "review";
}

std::optional<Granularity> parse_granularity(std::string_view s) {
    if (s == "sentence") return Granularity::sentence;
    if (s == "review") return Granularity::review;
    return std::nullopt;
}

const std::vector<DatasetInfo>& dataset_registry() {
    static const std::vector<DatasetInfo> registry = {
        {"laptop16", SourceFormat::semeval_xml, "laptop", Granularity::sentence},
        {"restaurant16", SourceFormat::semeval_xml, "restaurant", Granularity::sentence},
        {"mams", SourceFormat::mams_xml, "restaurant", Granularity::sentence},
        {"shoes", SourceFormat::shoes_quads, "shoes", Granularity::review},
    };
    return registry;
}

const DatasetInfo* find_dataset(std::string_view name) {
    for (const DatasetInfo& info : dataset_registry())
        if (info.name == name) return &info;
    return nullptr;
}

IngestStats& IngestStats::operator+=(const IngestStats& other) {
    kept += other.kept;
    dropped_conflicts += other.dropped_conflicts;
    dropped_empty += other.dropped_empty;
    dropped_bad_polarity += other.dropped_bad_polarity;
    skipped_records += other.skipped_records;
    return *this;
}

IngestResult ingest_semeval_xml(const std::string& path, std::string_view, Split split) {
    ptree pt = read_xml_file(path);
    IngestResult result;
    try {
        const ptree& reviews = pt.get_child("Reviews");
        for (const auto& [review_name, review] : reviews) {
            if (review_name != "Review") continue;
            const ptree* sentences = nullptr;
            if (auto child = review.get_child_optional("sentences")) sentences = &*child;
            if (!sentences) continue;
            for (const auto& [name, sentence] : *sentences) {
                if (name != "sentence") continue;
                const std::string id = sentence.get<std::string>("<xmlattr>.id");
                const std::string text = sentence.get<std::string>("text");
                std::vector<RawPair> raw;
                if (auto opinions = sentence.get_child_optional("Opinions"))
                    raw = attribute_pairs(*opinions, "Opinion", path + " sentence " + id);
                ingest_sentence(id, text, raw, split, result);
            }
        }
    } catch (const boost::property_tree::ptree_error& e) {
        throw DataError(path + ": " + e.what());
    }
    return result;
}

IngestResult ingest_mams_xml(const std::string& path, Split split) {
    ptree pt = read_xml_file(path);
    IngestResult result;
    std::size_t index = 0;
    try {
        const ptree& sentences = pt.get_child("sentences");
        for (const auto& [name, sentence] : sentences) {
            if (name != "sentence") continue;
            const std::string text = sentence.get<std::string>("text");
            std::string id = std::string(to_string(split)) + "-" + std::to_string(index++);
            std::vector<RawPair> raw;
            if (auto categories = sentence.get_child_optional("aspectCategories"))
                raw = attribute_pairs(*categories, "aspectCategory", path + " sentence " + id);
            ingest_sentence(id, text, raw, split, result);
        }
    } catch (const boost::property_tree::ptree_error& e) {
        throw DataError(path + ": " + e.what());
    }
    return result;
}

namespace {

struct ShoeReview {
    std::string text;
    std::vector<RawPair> raw;
};

IngestResult finish_shoes(std::vector<std::string>& order,
                          std::map<std::string, ShoeReview>& reviews, Split split,
                          IngestStats quad_stats) {
    IngestResult result;
    result.stats = quad_stats;
    for (const std::string& id : order) {
        ShoeReview& review = reviews[id];
        ingest_sentence(id, review.text, review.raw, split, result);
    }
    return result;
}

IngestResult ingest_shoes_jsonl(const std::string& path, Split split) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::string> order;
    std::map<std::string, ShoeReview> reviews;
    IngestStats quad_stats;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + " line " + std::to_string(line_no);
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        try {
            const std::string id = record.at("id").get<std::string>();
            const std::string text = record.at("text").get<std::string>();
            auto [it, inserted] = reviews.try_emplace(id, ShoeReview{text, {}});
            if (inserted)
                order.push_back(id);
            else if (it->second.text != text)
                throw DataError(where + ": id " + id + " repeats with different text");
            for (const json& quad : record.value("quads", json::array())) {
                if (!quad.is_array() || quad.size() != 4 || !quad[1].is_string() ||
                    !quad[3].is_string() || quad[1].get<std::string>().empty() ||
                    quad[3].get<std::string>().empty()) {
                    ++quad_stats.skipped_records;
                    continue;
                }
                it->second.raw.emplace_back(quad[1].get<std::string>(),
                                            quad[3].get<std::string>());
            }
        } catch (const json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
    }
    return finish_shoes(order, reviews, split, quad_stats);
}

IngestResult ingest_shoes_tsv(const std::string& path, Split split) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::string> order;
    std::map<std::string, ShoeReview> reviews;
    IngestStats quad_stats;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (line_no == 1 && fields.size() >= 1 && fields[0] == "id") continue;  // header row
        if (fields.size() != 6 || fields[3].empty() || fields[5].empty()) {
            ++quad_stats.skipped_records;
            continue;
        }
        const std::string& id = fields[0];
        const std::string& text = fields[1];
        auto [it, inserted] = reviews.try_emplace(id, ShoeReview{text, {}});
        if (inserted)
            order.push_back(id);
        else if (it->second.text != text)
            throw DataError(path + " line " + std::to_string(line_no) + ": id " + id +
                            " repeats with different text");
        it->second.raw.emplace_back(fields[3], fields[5]);
    }
    return finish_shoes(order, reviews, split, quad_stats);
}

}  // namespace

IngestResult ingest_shoes(const std::string& path, Split split) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string first_line;
    while (std::getline(in, first_line) && first_line.empty()) continue;
    in.close();
    if (!first_line.empty() && first_line.front() == '{')
        return ingest_shoes_jsonl(path, split);
    return ingest_shoes_tsv(path, split);
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
    json splits = json::object();
    for (const auto& [split, file] : manifest.splits)
        splits[std::string(to_string(split))] = file;
    json record = {{"name", manifest.name},
                   {"domain", manifest.domain},
                   {"granularity", std::string(to_string(manifest.granularity))},
                   {"splits", std::move(splits)},
                   {"schema",
                    {{"domain", manifest.schema.domain_name}, {"labels", manifest.schema.labels}}}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest " + path);
    out << record.dump(2) << '\n';
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path);
    json record;
    try {
        record = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("manifest " + path + ": " + e.what());
    }
    try {
        DatasetManifest manifest;
        manifest.name = record.at("name").get<std::string>();
        manifest.domain = record.at("domain").get<std::string>();
        const std::string granularity = record.at("granularity").get<std::string>();
        auto parsed_gran = parse_granularity(granularity);
        if (!parsed_gran)
            throw DataError("manifest " + path + ": unknown granularity \"" + granularity + "\"");
        manifest.granularity = *parsed_gran;
        for (const auto& [key, value] : record.at("splits").items()) {
            auto split = parse_split(key);
            if (!split) throw DataError("manifest " + path + ": unknown split \"" + key + "\"");
            manifest.splits.emplace_back(*split, value.get<std::string>());
        }
        manifest.schema = CategorySchema::make(
            record.at("schema").at("labels").get<std::vector<std::string>>(),
            record.at("schema").at("domain").get<std::string>());
        return manifest;
    } catch (const json::exception& e) {
        throw DataError("manifest " + path + ": " + e.what());
    }
}

IngestOutcome ingest_dataset(const DatasetInfo& info,
                             const std::vector<std::pair<Split, std::string>>& inputs) {
    if (inputs.empty()) throw ConfigError("dataset " + info.name + " needs at least one input");
    IngestOutcome outcome;
    outcome.corpus.dataset = info.name;
    std::vector<std::string> categories;
    std::set<std::string> ids;
    for (const auto& [split, path] : inputs) {
        IngestResult result;
        switch (info.format) {
            case SourceFormat::semeval_xml:
                result = ingest_semeval_xml(path, info.domain, split);
                break;
            case SourceFormat::mams_xml:
                result = ingest_mams_xml(path, split);
                break;
            case SourceFormat::shoes_quads:
                result = ingest_shoes(path, split);
                break;
        }
        outcome.stats += result.stats;
        for (const std::string& category : result.categories_seen)
            if (std::find(categories.begin(), categories.end(), category) == categories.end())
                categories.push_back(category);
        for (Instance& inst : result.instances) {
            if (!ids.insert(inst.id).second)
                throw DataError("dataset " + info.name + ": duplicate instance id " + inst.id);
            outcome.corpus.instances.push_back(std::move(inst));
        }
        outcome.manifest.splits.emplace_back(split, path);
    }
    if (categories.empty())
        throw DataError("dataset " + info.name + ": no instances survived ingestion");
    outcome.manifest.name = info.name;
    outcome.manifest.domain = info.domain;
    outcome.manifest.granularity = info.granularity;
    outcome.manifest.schema = CategorySchema::make(categories, info.domain);
    return outcome;
}

}  // namespace acsa
