#pragma once

#include <map>
#include <string>
#include <vector>

#include "coe/manifest.hpp"
#include "coe/report.hpp"

namespace coe {

struct RunOutcome {
    RunReport report;
    RecordsFile records;
    std::map<CoECondition, std::size_t> failures_per_condition;
    std::size_t n_failures = 0;

    bool partial() const { return n_failures > 0; }
};

/// Executes the full pipeline: load -> filter -> sample -> prompt ->
/// complete -> parse -> score, then writes records.jsonl, report.json,
/// report.md, report.csv and distribution.csv into manifest.output_dir.
/// Conditions run sequentially; pairs within a condition run concurrently
/// up to the backend's in-flight bound. Every completion is persisted to
/// the cache (when configured) before parsing, so a crashed run resumes
/// from cache. Hard errors (dataset, configuration, template pin
/// mismatch) throw; per-pair backend failures become records.
RunOutcome run(const RunManifest& manifest);

/// The dataset slice of the pipeline: load + filter + sample.
std::vector<SupportPair> sample_pairs(const RunManifest& manifest);

/// Recomputes the report from an existing records file and writes the
/// report artifacts into output_dir (defaults to the records file's
/// directory). On unmodified records this reproduces report.json
/// byte-for-byte.
RunReport score_records(const std::string& records_path, std::string output_dir = "");

/// Writes report.json, report.md, report.csv and distribution.csv.
void write_report_artifacts(const RunReport& report, const std::string& output_dir);

} // namespace coe
