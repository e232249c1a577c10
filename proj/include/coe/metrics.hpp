#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coe/parser.hpp"
#include "coe/prompt.hpp"
#include "coe/strategy.hpp"

namespace coe {

/// One evaluated (condition, pair) outcome. A backend failure after
/// retries is recorded as its own kind: excluded from metrics like noise,
/// but counted separately.
struct EvalRecord {
    std::string pair_id;
    CoECondition condition{};
    EmpathyStrategy gold_strategy{};
    CommunicationLevel gold_level{};
    std::optional<ParsedPrediction> prediction; // nullopt => backend failure
    std::string backend_error;                  // set when prediction is nullopt
    std::string completion_key;
};

/// 3x3 grid indexed [gold][predicted] plus exclusion tallies.
/// sum(counts) + n_excluded + n_failed == n_total.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, 3>, 3> counts{};
    std::uint64_t n_excluded = 0; // noise outcomes
    std::uint64_t n_failed = 0;   // backend failures
    std::uint64_t n_total = 0;

    std::uint64_t at(EmpathyStrategy gold, EmpathyStrategy predicted) const {
        return counts[static_cast<std::size_t>(gold)][static_cast<std::size_t>(predicted)];
    }
    std::uint64_t row_sum(EmpathyStrategy gold) const;
    std::uint64_t col_sum(EmpathyStrategy predicted) const;
    std::uint64_t trace() const;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const ClassMetrics&) const = default;
};

/// Auxiliary communication-level agreement, scored only over records where
/// both gold and predicted levels exist. Not part of the headline table.
struct LevelMetrics {
    std::uint64_t n_scored = 0;
    std::uint64_t n_agree = 0;
    double accuracy = 0.0;

    bool operator==(const LevelMetrics&) const = default;
};

struct MetricsReport {
    CoECondition condition{};
    double accuracy = 0.0;             // trace / (n_total - n_excluded - n_failed)
    double accuracy_all_records = 0.0; // trace / n_total, reported for transparency
    bool degenerate_denominator = false;
    std::map<EmpathyStrategy, ClassMetrics> per_class;
    std::uint64_t n_evaluated = 0; // valid records entering the matrix
    std::uint64_t n_excluded = 0;
    std::uint64_t n_failed = 0;
    std::uint64_t n_total = 0;
    LevelMetrics level;

    bool operator==(const MetricsReport&) const = default;
};

/// Counts records into a confusion matrix. All records must share one
/// condition; mixing conditions throws Error.
ConfusionMatrix build_confusion(const std::vector<EvalRecord>& records);

/// Precision/recall/F1 for one class; zero denominators resolve to 0.
ClassMetrics class_metrics(const ConfusionMatrix& m, EmpathyStrategy c);

/// Noise-excluded accuracy; 0 when the denominator is empty.
double accuracy(const ConfusionMatrix& m);

/// Full per-condition report (matrix metrics + level agreement).
MetricsReport compute_metrics(const std::vector<EvalRecord>& records, CoECondition condition);

} // namespace coe
