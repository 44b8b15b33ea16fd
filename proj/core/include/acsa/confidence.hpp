#pragma once

#include <span>
#include <string>

#include "acsa/llm.hpp"
#include "acsa/parse.hpp"

namespace acsa {

/// Mean of exp(logprob) over the tokens whose spans overlap the pair's
/// category or polarity span, skipping tokens that carry no alphanumeric
/// character (pure punctuation, brackets, quotes, whitespace). Returns 0
/// when no token qualifies. Throws AlignmentError when a span reaches
/// past the text covered by the tokens.
double score_pair(const ParsedPair& pair, std::span<const TokenProb> tokens);

/// Mean of the pair confidences; 0 for an empty list.
double score_list(std::span<const ScoredPair> pairs);

/// Sum of list confidences over a dataset; the most-confident-agent key.
double agent_dataset_confidence(std::span<const ScoredList> runs);

/// Scores every parsed pair against the token stream and assembles the
/// agent's ScoredList (mapped pairs only).
ScoredList score_parsed_list(const ParsedList& parsed, std::span<const TokenProb> tokens,
                             const std::string& agent);

}  // namespace acsa
