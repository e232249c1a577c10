#include "coe/report.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coe/error.hpp"

namespace coe {

using nlohmann::json;

namespace {

// Table 2 column order differs from the corpus order.
constexpr std::array<EmpathyStrategy, 3> kTableColumnOrder = {
    EmpathyStrategy::EmotionalReaction,
    EmpathyStrategy::Interpretation,
    EmpathyStrategy::Exploration,
};

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

json metrics_to_json(const MetricsReport& m) {
    json per_class = json::object();
    for (EmpathyStrategy s : kAllStrategies) {
        const ClassMetrics& cm = m.per_class.at(s);
        per_class[std::string(strategy_id(s))] = {
            {"precision", cm.precision}, {"recall", cm.recall}, {"f1", cm.f1}};
    }
    return json{{"condition", std::string(condition_id(m.condition))},
                {"accuracy", m.accuracy},
                {"accuracy_all_records", m.accuracy_all_records},
                {"degenerate_denominator", m.degenerate_denominator},
                {"n_total", m.n_total},
                {"n_evaluated", m.n_evaluated},
                {"n_excluded", m.n_excluded},
                {"n_failed", m.n_failed},
                {"per_class", per_class},
                {"level", {{"n_scored", m.level.n_scored},
                           {"n_agree", m.level.n_agree},
                           {"accuracy", m.level.accuracy}}}};
}

MetricsReport metrics_from_json(const json& j) {
    MetricsReport m;
    auto condition = condition_from_id(j.at("condition").get<std::string>());
    if (!condition) throw Error("unknown condition in report json");
    m.condition = *condition;
    m.accuracy = j.at("accuracy").get<double>();
    m.accuracy_all_records = j.at("accuracy_all_records").get<double>();
    m.degenerate_denominator = j.at("degenerate_denominator").get<bool>();
    m.n_total = j.at("n_total").get<std::uint64_t>();
    m.n_evaluated = j.at("n_evaluated").get<std::uint64_t>();
    m.n_excluded = j.at("n_excluded").get<std::uint64_t>();
    m.n_failed = j.at("n_failed").get<std::uint64_t>();
    for (EmpathyStrategy s : kAllStrategies) {
        const json& cm = j.at("per_class").at(std::string(strategy_id(s)));
        m.per_class[s] = ClassMetrics{cm.at("precision").get<double>(),
                                      cm.at("recall").get<double>(),
                                      cm.at("f1").get<double>()};
    }
    const json& level = j.at("level");
    m.level.n_scored = level.at("n_scored").get<std::uint64_t>();
    m.level.n_agree = level.at("n_agree").get<std::uint64_t>();
    m.level.accuracy = level.at("accuracy").get<double>();
    return m;
}

} // namespace

TableFormat table_format_from_string(std::string_view name) {
    if (name == "markdown") return TableFormat::Markdown;
    if (name == "csv") return TableFormat::Csv;
    if (name == "json") return TableFormat::Json;
    throw Error("unknown table format '" + std::string(name) +
                "' (expected markdown, csv or json)");
}

RunReport build_run_report(const RecordsFile& records) {
    RunReport report;
    report.manifest_digest = records.manifest_digest;
    report.sampler_id = records.sampler_id;
    report.template_version = records.template_version;

    std::map<CoECondition, std::vector<EvalRecord>> by_condition;
    for (const EvalRecord& r : records.records) by_condition[r.condition].push_back(r);

    for (CoECondition c : kAllConditions) {
        const bool in_run =
            std::find(records.conditions.begin(), records.conditions.end(), c) !=
            records.conditions.end();
        if (!in_run) continue;
        const auto& recs = by_condition[c];
        report.per_condition.push_back(compute_metrics(recs, c));

        Distribution dist;
        for (const EvalRecord& r : recs) {
            if (!r.prediction) {
                ++dist.backend_failures;
            } else if (const ValidPrediction* v = r.prediction->valid()) {
                ++dist.predicted[static_cast<std::size_t>(v->strategy)];
            } else {
                ++dist.noise;
            }
        }
        report.distributions[c] = dist;
    }
    return report;
}

std::string render_table(const RunReport& report, TableFormat format) {
    if (format == TableFormat::Json) {
        json conditions = json::array();
        for (const MetricsReport& m : report.per_condition) {
            conditions.push_back(metrics_to_json(m));
        }
        json distributions = json::object();
        for (const auto& [condition, dist] : report.distributions) {
            json d = json::object();
            for (EmpathyStrategy s : kAllStrategies) {
                d[std::string(strategy_id(s))] = dist.predicted[static_cast<std::size_t>(s)];
            }
            d["noise"] = dist.noise;
            d["backend_failure"] = dist.backend_failures;
            distributions[std::string(condition_id(condition))] = d;
        }
        json j{{"v", 1},
               {"manifest_digest", report.manifest_digest},
               {"sampler", report.sampler_id},
               {"template_version", report.template_version},
               {"conditions", conditions},
               {"distributions", distributions}};
        return j.dump(2) + "\n";
    }

    if (format == TableFormat::Csv) {
        std::ostringstream out;
        out << "condition,acc";
        for (EmpathyStrategy s : kTableColumnOrder) {
            const std::string id(strategy_id(s));
            out << "," << id << "_precision," << id << "_recall," << id << "_f1";
        }
        out << "\n";
        for (const MetricsReport& m : report.per_condition) {
            out << condition_name(m.condition) << "," << fixed3(m.accuracy);
            for (EmpathyStrategy s : kTableColumnOrder) {
                const ClassMetrics& cm = m.per_class.at(s);
                out << "," << fixed3(cm.precision) << "," << fixed3(cm.recall) << ","
                    << fixed3(cm.f1);
            }
            out << "\n";
        }
        return out.str();
    }

    // Markdown
    std::ostringstream out;
    out << "# Chain-of-Empathy run report\n\n";
    out << "- Manifest digest: `" << report.manifest_digest << "`\n";
    out << "- Sampler: `" << report.sampler_id << "`\n";
    out << "- Template version: `" << report.template_version << "`\n\n";
    out << "| Condition | Acc |";
    for (EmpathyStrategy s : kTableColumnOrder) {
        std::string name(strategy_name(s));
        bool word_start = true;
        for (char& c : name) {
            if (word_start) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            word_start = (c == ' ');
        }
        out << " " << name << " Prec. | " << name << " Recall | " << name << " F1 |";
    }
    out << "\n|---|---|";
    for (int i = 0; i < 9; ++i) out << "---|";
    out << "\n";
    for (const MetricsReport& m : report.per_condition) {
        out << "| " << condition_name(m.condition) << " | " << fixed3(m.accuracy) << " |";
        for (EmpathyStrategy s : kTableColumnOrder) {
            const ClassMetrics& cm = m.per_class.at(s);
            out << " " << fixed3(cm.precision) << " | " << fixed3(cm.recall) << " | "
                << fixed3(cm.f1) << " |";
        }
        out << "\n";
    }
    out << "\n## Record counts\n\n";
    out << "| Condition | Total | Evaluated | Excluded (noise) | Backend failures | "
           "Acc (all records) |\n|---|---|---|---|---|---|\n";
    for (const MetricsReport& m : report.per_condition) {
        out << "| " << condition_name(m.condition) << " | " << m.n_total << " | "
            << m.n_evaluated << " | " << m.n_excluded << " | " << m.n_failed << " | "
            << fixed3(m.accuracy_all_records) << " |\n";
    }
    out << "\n## Communication level agreement (auxiliary)\n\n";
    out << "Scored only where the model emitted a level; strategies are the "
           "headline metric.\n\n";
    out << "| Condition | Scored | Agree | Accuracy |\n|---|---|---|---|\n";
    for (const MetricsReport& m : report.per_condition) {
        out << "| " << condition_name(m.condition) << " | " << m.level.n_scored << " | "
            << m.level.n_agree << " | " << fixed3(m.level.accuracy) << " |\n";
    }
    return out.str();
}

std::string export_distribution(const RunReport& report) {
    std::ostringstream out;
    out << "condition,predicted,count,fraction\n";
    for (const MetricsReport& m : report.per_condition) {
        const auto it = report.distributions.find(m.condition);
        if (it == report.distributions.end()) continue;
        const Distribution& dist = it->second;
        const std::uint64_t total = dist.total();
        auto row = [&](std::string_view label, std::uint64_t count) {
            const double fraction =
                total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
            out << condition_id(m.condition) << "," << label << "," << count << ","
                << fixed6(fraction) << "\n";
        };
        for (EmpathyStrategy s : kAllStrategies) {
            row(strategy_id(s), dist.predicted[static_cast<std::size_t>(s)]);
        }
        row("noise", dist.noise);
        if (dist.backend_failures > 0) row("backend_failure", dist.backend_failures);
    }
    return out.str();
}

RunReport run_report_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(std::string("report json: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("v").get<int>() != 1) throw Error("unsupported report schema version");
        RunReport report;
        report.manifest_digest = j.at("manifest_digest").get<std::string>();
        report.sampler_id = j.at("sampler").get<std::string>();
        report.template_version = j.at("template_version").get<std::string>();
        for (const json& cm : j.at("conditions")) {
            report.per_condition.push_back(metrics_from_json(cm));
        }
        for (const auto& [key, value] : j.at("distributions").items()) {
            auto condition = condition_from_id(key);
            if (!condition) throw Error("unknown condition '" + key + "' in distributions");
            Distribution dist;
            for (EmpathyStrategy s : kAllStrategies) {
                dist.predicted[static_cast<std::size_t>(s)] =
                    value.at(std::string(strategy_id(s))).get<std::uint64_t>();
            }
            dist.noise = value.at("noise").get<std::uint64_t>();
            dist.backend_failures = value.at("backend_failure").get<std::uint64_t>();
            report.distributions[*condition] = dist;
        }
        return report;
    } catch (const json::exception& e) {
        throw Error(std::string("report json: missing or mistyped field: ") + e.what());
    }
}

} // namespace coe
