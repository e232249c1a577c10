#pragma once

#include <string>
#include <vector>

#include "coe/metrics.hpp"

namespace coe {

/// records.jsonl: one header line with run provenance, then one EvalRecord
/// per line (schema v1). The header carries everything `score` needs to
/// rebuild report.json byte-for-byte from the records alone.
struct RecordsFile {
    std::string manifest_digest;
    std::string sampler_id;
    std::string template_version;
    std::vector<CoECondition> conditions; // run order
    std::size_t n_pairs = 0;              // sampled pairs per condition
    std::vector<EvalRecord> records;
};

std::string records_header_line(const RecordsFile& file);
std::string record_line(const EvalRecord& record);

/// Writes header + records to `path` (overwrites).
void write_records(const RecordsFile& file, const std::string& path);

/// Parses a records file; throws Error with line numbers on malformed
/// input.
RecordsFile read_records(const std::string& path);

} // namespace coe
