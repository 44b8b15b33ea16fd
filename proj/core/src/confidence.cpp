#include "acsa/confidence.hpp"

#include <cctype>
#include <cmath>

namespace acsa {

namespace {

bool has_alnum(std::string_view s) {
    for (unsigned char c : s)
        if (std::isalnum(c)) return true;
    return false;
}

void check_span(const CharSpan& span, std::size_t covered) {
    if (span.end > covered)
        throw AlignmentError("parsed span [" + std::to_string(span.begin) + ", " +
                             std::to_string(span.end) + ") exceeds token coverage of " +
                             std::to_string(covered) + " chars");
}

}  // namespace

double score_pair(const ParsedPair& pair, std::span<const TokenProb> tokens) {
    std::size_t covered = tokens.empty() ? 0 : tokens.back().span.end;
    check_span(pair.category_span, covered);
    check_span(pair.polarity_span, covered);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& tok : tokens) {
        if (!tok.span.overlaps(pair.category_span) && !tok.span.overlaps(pair.polarity_span))
            continue;
        if (!has_alnum(tok.text)) continue;
        sum += std::exp(tok.logprob);
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double score_list(std::span<const ScoredPair> pairs) {
    if (pairs.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& p : pairs) sum += p.confidence;
    return sum / static_cast<double>(pairs.size());
}

double agent_dataset_confidence(std::span<const ScoredList> runs) {
    double sum = 0.0;
    for (const auto& r : runs) sum += r.list_confidence;
    return sum;
}

ScoredList score_parsed_list(const ParsedList& parsed, std::span<const TokenProb> tokens,
                             const std::string& agent) {
    std::vector<ScoredPair> scored;
    scored.reserve(parsed.pairs.size());
    for (const auto& p : parsed.pairs) {
        ScoredPair sp;
        sp.pair = Pair{p.mapped_category, p.mapped_polarity};
        sp.confidence = score_pair(p, tokens);
        sp.source_agent = agent;
        scored.push_back(std::move(sp));
    }
    return make_scored_list(std::move(scored));
}

}  // namespace acsa
