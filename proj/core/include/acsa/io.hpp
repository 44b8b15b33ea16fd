#pragma once

#include <string>
#include <vector>

#include "acsa/domain.hpp"

namespace acsa {

/// A dataset materialized as instances, all sharing one dataset name.
struct Corpus {
    std::string dataset;
    std::vector<Instance> instances;
};

/// One JSON object per line: {"dataset", "gold": [[category, polarity]...],
/// "id", "split", "text"}.
void write_corpus_jsonl(const Corpus& corpus, const std::string& path);

/// Throws DataError with the offending line number on malformed input
/// or when lines disagree about the dataset name.
Corpus read_corpus_jsonl(const std::string& path);

/// Replaces every ${NAME} with the value of the environment variable.
/// Throws ConfigError when a referenced variable is unset.
std::string interpolate_env(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace acsa
