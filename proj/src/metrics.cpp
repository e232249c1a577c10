#include "coe/metrics.hpp"

#include "coe/error.hpp"

namespace coe {

std::uint64_t ConfusionMatrix::row_sum(EmpathyStrategy gold) const {
    const auto& row = counts[static_cast<std::size_t>(gold)];
    return row[0] + row[1] + row[2];
}

std::uint64_t ConfusionMatrix::col_sum(EmpathyStrategy predicted) const {
    const auto j = static_cast<std::size_t>(predicted);
    return counts[0][j] + counts[1][j] + counts[2][j];
}

std::uint64_t ConfusionMatrix::trace() const {
    return counts[0][0] + counts[1][1] + counts[2][2];
}

ConfusionMatrix build_confusion(const std::vector<EvalRecord>& records) {
    ConfusionMatrix m;
    bool first = true;
    CoECondition condition{};
    for (const EvalRecord& r : records) {
        if (first) {
            condition = r.condition;
            first = false;
        } else if (r.condition != condition) {
            throw Error("build_confusion: records mix conditions '" +
                        std::string(condition_id(condition)) + "' and '" +
                        std::string(condition_id(r.condition)) + "'");
        }
        ++m.n_total;
        if (!r.prediction) {
            ++m.n_failed;
        } else if (const ValidPrediction* v = r.prediction->valid()) {
            ++m.counts[static_cast<std::size_t>(r.gold_strategy)]
                      [static_cast<std::size_t>(v->strategy)];
        } else {
            ++m.n_excluded;
        }
    }
    return m;
}

ClassMetrics class_metrics(const ConfusionMatrix& m, EmpathyStrategy c) {
    ClassMetrics out;
    const double tp = static_cast<double>(m.at(c, c));
    const std::uint64_t col = m.col_sum(c);
    const std::uint64_t row = m.row_sum(c);
    out.precision = col == 0 ? 0.0 : tp / static_cast<double>(col);
    out.recall = row == 0 ? 0.0 : tp / static_cast<double>(row);
    out.f1 = (out.precision + out.recall) > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

double accuracy(const ConfusionMatrix& m) {
    const std::uint64_t denom = m.n_total - m.n_excluded - m.n_failed;
    if (denom == 0) return 0.0;
    return static_cast<double>(m.trace()) / static_cast<double>(denom);
}

MetricsReport compute_metrics(const std::vector<EvalRecord>& records, CoECondition condition) {
    for (const EvalRecord& r : records) {
        if (r.condition != condition) {
            throw Error("compute_metrics: record for '" +
                        std::string(condition_id(r.condition)) +
                        "' passed to report for '" + std::string(condition_id(condition)) + "'");
        }
    }
    const ConfusionMatrix m = build_confusion(records);

    MetricsReport report;
    report.condition = condition;
    report.n_total = m.n_total;
    report.n_excluded = m.n_excluded;
    report.n_failed = m.n_failed;
    report.n_evaluated = m.n_total - m.n_excluded - m.n_failed;
    report.degenerate_denominator = report.n_evaluated == 0;
    report.accuracy = accuracy(m);
    report.accuracy_all_records =
        m.n_total == 0 ? 0.0 : static_cast<double>(m.trace()) / static_cast<double>(m.n_total);
    for (EmpathyStrategy s : kAllStrategies) {
        report.per_class[s] = class_metrics(m, s);
    }

    for (const EvalRecord& r : records) {
        if (!r.prediction) continue;
        const ValidPrediction* v = r.prediction->valid();
        if (!v || !v->level) continue;
        ++report.level.n_scored;
        if (*v->level == r.gold_level) ++report.level.n_agree;
    }
    report.level.accuracy =
        report.level.n_scored == 0
            ? 0.0
            : static_cast<double>(report.level.n_agree) / static_cast<double>(report.level.n_scored);
    return report;
}

} // namespace coe
