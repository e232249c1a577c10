#include <doctest.h>

#include <sstream>

#include "coe/error.hpp"
#include "coe/report.hpp"

using namespace coe;

namespace {

MetricsReport table2_base_row() {
    MetricsReport m;
    m.condition = CoECondition::Base;
    m.accuracy = 0.340;
    m.accuracy_all_records = 0.340;
    m.per_class[EmpathyStrategy::EmotionalReaction] = ClassMetrics{0.467, 0.185, 0.27};
    m.per_class[EmpathyStrategy::Interpretation] = ClassMetrics{0.0, 0.0, 0.0};
    m.per_class[EmpathyStrategy::Exploration] = ClassMetrics{0.327, 0.866, 0.475};
    m.n_total = 100;
    m.n_evaluated = 90;
    m.n_excluded = 10;
    return m;
}

RunReport small_report() {
    RunReport report;
    report.manifest_digest = "d1";
    report.sampler_id = "sampler-x";
    report.template_version = "tv-abc";
    report.per_condition.push_back(table2_base_row());
    Distribution dist;
    dist.predicted[static_cast<std::size_t>(EmpathyStrategy::Exploration)] = 8;
    dist.noise = 2;
    report.distributions[CoECondition::Base] = dist;
    return report;
}

} // namespace

TEST_CASE("render_table csv: reproduces the reference Base row at 3 decimals") {
    auto report = small_report();
    const std::string csv = render_table(report, TableFormat::Csv);
    std::istringstream lines(csv);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header ==
          "condition,acc,emotional_reaction_precision,emotional_reaction_recall,"
          "emotional_reaction_f1,interpretation_precision,interpretation_recall,"
          "interpretation_f1,exploration_precision,exploration_recall,exploration_f1");
    CHECK(row == "Base,0.340,0.467,0.185,0.270,0.000,0.000,0.000,0.327,0.866,0.475");
}

TEST_CASE("render_table markdown: same figures, column order ER/Int/Exp") {
    const std::string md = render_table(small_report(), TableFormat::Markdown);
    CHECK(md.find("| Base | 0.340 | 0.467 | 0.185 | 0.270 | 0.000 | 0.000 | 0.000 | 0.327 "
                  "| 0.866 | 0.475 |") != std::string::npos);
    CHECK(md.find("Emotional Reaction Prec.") != std::string::npos);
    // Interpretation column group comes before Exploration
    CHECK(md.find("Interpretation Prec.") < md.find("Exploration Prec."));
}

TEST_CASE("render_table: empty report gives a header-only table") {
    RunReport report;
    report.manifest_digest = "d";
    const std::string csv = render_table(report, TableFormat::Csv);
    std::istringstream lines(csv);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) ++n;
    CHECK(n == 1);
}

TEST_CASE("render_table: deterministic bytes") {
    auto report = small_report();
    for (TableFormat f : {TableFormat::Markdown, TableFormat::Csv, TableFormat::Json}) {
        CHECK(render_table(report, f) == render_table(report, f));
    }
}

TEST_CASE("render_table json: full precision and exclusion counts, lossless round-trip") {
    auto report = small_report();
    report.per_condition[0].accuracy = 1.0 / 3.0; // not representable at 3 decimals
    const std::string json_text = render_table(report, TableFormat::Json);
    CHECK(json_text.find("n_excluded") != std::string::npos);
    RunReport parsed = run_report_from_json(json_text);
    CHECK(parsed == report);
    CHECK(parsed.per_condition[0].accuracy == report.per_condition[0].accuracy);
}

TEST_CASE("table_format_from_string: unknown format is an error") {
    CHECK(table_format_from_string("markdown") == TableFormat::Markdown);
    CHECK(table_format_from_string("csv") == TableFormat::Csv);
    CHECK(table_format_from_string("json") == TableFormat::Json);
    CHECK_THROWS_AS(table_format_from_string("html"), Error);
}

TEST_CASE("export_distribution: counts and fractions") {
    const std::string csv = export_distribution(small_report());
    std::istringstream lines(csv);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(lines, line)) rows.push_back(line);
    REQUIRE(rows.size() == 5); // header + 3 classes + noise
    CHECK(rows[0] == "condition,predicted,count,fraction");
    CHECK(rows[1] == "base,emotional_reaction,0,0.000000");
    CHECK(rows[2] == "base,exploration,8,0.800000");
    CHECK(rows[3] == "base,interpretation,0,0.000000");
    CHECK(rows[4] == "base,noise,2,0.200000");
}

TEST_CASE("export_distribution: five conditions give exactly 5 x 4 rows") {
    RunReport report;
    for (CoECondition c : kAllConditions) {
        MetricsReport m = table2_base_row();
        m.condition = c;
        report.per_condition.push_back(m);
        Distribution dist;
        dist.predicted[0] = 1;
        dist.noise = 1;
        report.distributions[c] = dist;
    }
    const std::string csv = export_distribution(report);
    std::istringstream lines(csv);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) ++n;
    CHECK(n == 1 + 5 * 4);
}
