#include "acsa/io.hpp"

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "acsa/errors.hpp"

namespace acsa {

namespace {

using nlohmann::json;

json gold_to_json(const PairList& gold) {
    json out = json::array();
    for (const Pair& p : gold) out.push_back({p.category, std::string(to_string(p.polarity))});
    return out;
}

}  // namespace

void write_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write corpus " + path);
    for (const Instance& inst : corpus.instances) {
        json record = {{"dataset", corpus.dataset},
                       {"gold", gold_to_json(inst.gold)},
                       {"id", inst.id},
                       {"split", std::string(to_string(inst.split))},
                       {"text", inst.text}};
        out << record.dump() << '\n';
    }
}

Corpus read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus " + path);
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "corpus " + path + " line " + std::to_string(line_no);
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        try {
            Instance inst;
            inst.id = record.at("id").get<std::string>();
            inst.text = record.at("text").get<std::string>();
            const std::string split = record.at("split").get<std::string>();
            auto parsed_split = parse_split(split);
            if (!parsed_split) throw DataError(where + ": unknown split \"" + split + "\"");
            inst.split = *parsed_split;
            for (const json& g : record.at("gold")) {
                if (!g.is_array() || g.size() != 2)
                    throw DataError(where + ": gold entries must be [category, polarity] pairs");
                const std::string polarity = g[1].get<std::string>();
                auto parsed_pol = parse_polarity(polarity);
                if (!parsed_pol)
                    throw DataError(where + ": unknown polarity \"" + polarity + "\"");
                inst.gold.push_back({g[0].get<std::string>(), *parsed_pol});
            }
            const std::string dataset = record.at("dataset").get<std::string>();
            if (corpus.instances.empty())
                corpus.dataset = dataset;
            else if (dataset != corpus.dataset)
                throw DataError(where + ": dataset \"" + dataset + "\" differs from \"" +
                                corpus.dataset + "\"");
            corpus.instances.push_back(std::move(inst));
        } catch (const json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
    }
    return corpus;
}

std::string interpolate_env(const std::string& text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '$' && i + 1 < text.size() && text[i + 1] == '{') {
            const std::size_t close = text.find('}', i + 2);
            if (close == std::string::npos)
                throw ConfigError("unterminated ${...} in \"" + text + "\"");
            const std::string name = text.substr(i + 2, close - i - 2);
            const char* value = std::getenv(name.c_str());
            if (!value)
                throw ConfigError("environment variable " + name + " is not set");
            out += value;
            i = close + 1;
        } else {
            out += text[i];
            ++i;
        }
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << content;
}

}  // namespace acsa
