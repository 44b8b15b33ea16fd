#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "acsa/domain.hpp"
#include "acsa/io.hpp"

namespace acsa {

enum class Granularity { sentence, review };

std::string_view to_string(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view s);

enum class SourceFormat { semeval_xml, mams_xml, shoes_quads };

struct DatasetInfo {
    std::string name;
    SourceFormat format = SourceFormat::semeval_xml;
    std::string domain;
    Granularity granularity = Granularity::sentence;
};

/// Known datasets: laptop16, restaurant16 (SemEval-2016 XML), mams
/// (aspect-category XML) and shoes (review-level quad records).
const std::vector<DatasetInfo>& dataset_registry();
const DatasetInfo* find_dataset(std::string_view name);

struct IngestStats {
    std::size_t kept = 0;
    std::size_t dropped_conflicts = 0;      // a category with two polarities
    std::size_t dropped_empty = 0;          // no gold pair survived
    std::size_t dropped_bad_polarity = 0;   // unknown polarity string
    std::size_t skipped_records = 0;        // malformed quad rows
    IngestStats& operator+=(const IngestStats& other);
};

struct IngestResult {
    std::vector<Instance> instances;
    std::vector<std::string> categories_seen;  // first-seen order over kept instances
    IngestStats stats;
};

/// SemEval-2016 Task-5 sentence XML. Malformed XML raises DataError
/// with the parser's line number.
IngestResult ingest_semeval_xml(const std::string& path, std::string_view domain, Split split);

/// MAMS aspect-category XML. Ids are synthesized as "<split>-<index>".
IngestResult ingest_mams_xml(const std::string& path, Split split);

/// Shoes quad records, either JSONL
/// {"id", "text", "quads": [[aspect, category, opinion, sentiment]...]}
/// or tab-separated rows id/text/aspect/category/opinion/sentiment with
/// rows of one review sharing its id. Gold pairs are the deduplicated
/// (category, sentiment) projections.
IngestResult ingest_shoes(const std::string& path, Split split);

struct DatasetManifest {
    std::string name;
    std::string domain;
    Granularity granularity = Granularity::sentence;
    std::vector<std::pair<Split, std::string>> splits;  // split -> source path
    CategorySchema schema;
};

void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

struct IngestOutcome {
    Corpus corpus;
    DatasetManifest manifest;
    IngestStats stats;
};

/// Ingests every (split, file) input of one dataset and assembles the
/// corpus plus its manifest; the schema lists categories in first-seen
/// order. Duplicate instance ids across inputs raise DataError.
IngestOutcome ingest_dataset(const DatasetInfo& info,
                             const std::vector<std::pair<Split, std::string>>& inputs);

}  // namespace acsa
