#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "coe/metrics.hpp"
#include "coe/records.hpp"

namespace coe {

/// Predicted-strategy counts for one condition, noise and failures
/// included, so the counts always sum to the condition's record total.
struct Distribution {
    std::array<std::uint64_t, 3> predicted{}; // indexed by strategy ordinal
    std::uint64_t noise = 0;
    std::uint64_t backend_failures = 0;

    std::uint64_t total() const {
        return predicted[0] + predicted[1] + predicted[2] + noise + backend_failures;
    }
    bool operator==(const Distribution&) const = default;
};

/// The full result of one run. generated_at is wall-clock provenance and
/// is deliberately excluded from serialization and equality so repeated
/// runs and `score` reproduce identical bytes.
struct RunReport {
    std::string manifest_digest;
    std::string sampler_id;
    std::string template_version;
    std::vector<MetricsReport> per_condition; // fixed Base, CBT, DBT, PCT, RT order
    std::map<CoECondition, Distribution> distributions;
    std::string generated_at;

    bool operator==(const RunReport& other) const {
        return manifest_digest == other.manifest_digest && sampler_id == other.sampler_id &&
               template_version == other.template_version &&
               per_condition == other.per_condition && distributions == other.distributions;
    }
};

enum class TableFormat { Markdown, Csv, Json };

/// Parses "markdown" | "csv" | "json"; throws Error on anything else.
TableFormat table_format_from_string(std::string_view name);

/// Builds the report from a records file; deterministic, so `run` and
/// `score` produce identical bytes from identical records.
RunReport build_run_report(const RecordsFile& records);

/// Renders the comparison table. Columns: Condition, Acc, then
/// Prec./Recall/F1 for Emotional Reaction, Interpretation, Exploration.
/// Markdown/CSV print 3-decimal fixed values; JSON carries full precision
/// plus exclusion counts.
std::string render_table(const RunReport& report, TableFormat format);

/// CSV of per-condition predicted-class counts and fractions (one row per
/// condition x {strategies, noise, failures-when-present}).
std::string export_distribution(const RunReport& report);

/// Inverse of render_table(Json) for round-trip checks and tooling.
RunReport run_report_from_json(const std::string& json_text);

} // namespace coe
