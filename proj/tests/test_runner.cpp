#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "coe/error.hpp"
#include "coe/records.hpp"
#include "coe/runner.hpp"
#include "test_util.hpp"

using namespace coe;
using namespace coe::test;

namespace {

/// Six-pair corpus (two per strategy) plus a mock script covering it.
struct SmallFixture {
    std::filesystem::path dir;
    RunManifest manifest;
};

SmallFixture small_fixture(const std::string& hint, std::vector<CoECondition> conditions = {
                                                        CoECondition::Base,
                                                        CoECondition::CbtCoE}) {
    SmallFixture fx;
    fx.dir = temp_dir(hint);
    fx.manifest.dataset_files = write_corpus(fx.dir, 2, 2, 2);
    fx.manifest.sampling.rng_seed = 11;
    for (EmpathyStrategy s : kAllStrategies) {
        fx.manifest.sampling.target_per_strategy[s] = SampleTarget::take_all();
    }
    fx.manifest.conditions = std::move(conditions);
    fx.manifest.backend.kind = "mock";
    fx.manifest.backend.mock_default = "Strategy: exploration\nLevel: weak\nResponse: ok";
    fx.manifest.backend.mock_script = {
        {"er0:r0", "Strategy: emotional reaction\nLevel: strong\nResponse: a"},
        {"int0:r0", "Strategy: Reflection"},
        {"int1:r1@cbt_coe", "Strategy: interpretation\nLevel: weak\nResponse: b"},
    };
    fx.manifest.output_dir = (fx.dir / "out").string();
    return fx;
}

} // namespace

TEST_CASE("run: mock pipeline produces records and scored artifacts") {
    auto fx = small_fixture("run_basic");
    RunOutcome outcome = run(fx.manifest);

    CHECK(outcome.n_failures == 0);
    REQUIRE(outcome.records.records.size() == 12); // 6 pairs x 2 conditions
    CHECK(outcome.records.n_pairs == 6);
    REQUIRE(outcome.report.per_condition.size() == 2);

    // Base: er0 correct ER; er1/exp0/exp1 predicted exploration; int0 noise; int1 exploration
    const MetricsReport& base = outcome.report.per_condition[0];
    CHECK(base.condition == CoECondition::Base);
    CHECK(base.n_total == 6);
    CHECK(base.n_excluded == 1);
    CHECK(base.n_evaluated == 5);
    // correct: er0 (ER), exp0+exp1 (exploration) -> 3 of 5
    CHECK(base.accuracy == doctest::Approx(3.0 / 5.0));

    // CBT: int1 scripted to interpretation via condition-qualified tag
    const MetricsReport& cbt = outcome.report.per_condition[1];
    CHECK(cbt.condition == CoECondition::CbtCoE);
    CHECK(cbt.accuracy == doctest::Approx(4.0 / 5.0));

    for (const char* name : {"records.jsonl", "report.json", "report.md", "report.csv",
                             "distribution.csv"}) {
        CHECK(std::filesystem::exists(fx.dir / "out" / name));
    }

    SUBCASE("records round-trip through the file") {
        auto reread = read_records((fx.dir / "out" / "records.jsonl").string());
        CHECK(reread.manifest_digest == outcome.records.manifest_digest);
        CHECK(reread.sampler_id == kSamplerId);
        CHECK(reread.template_version == template_version());
        REQUIRE(reread.records.size() == outcome.records.records.size());
        for (std::size_t i = 0; i < reread.records.size(); ++i) {
            CHECK(reread.records[i].pair_id == outcome.records.records[i].pair_id);
            CHECK(reread.records[i].completion_key ==
                  outcome.records.records[i].completion_key);
        }
    }

    SUBCASE("score on unmodified records reproduces report.json byte-for-byte") {
        const std::string original = read_file(fx.dir / "out" / "report.json");
        auto score_dir = temp_dir("score_out");
        score_records((fx.dir / "out" / "records.jsonl").string(), score_dir.string());
        CHECK(read_file(score_dir / "report.json") == original);
        CHECK(read_file(score_dir / "distribution.csv") ==
              read_file(fx.dir / "out" / "distribution.csv"));
    }

    SUBCASE("distribution recount from records matches the export") {
        auto reread = read_records((fx.dir / "out" / "records.jsonl").string());
        std::map<CoECondition, std::map<std::string, int>> recount;
        for (const auto& r : reread.records) {
            if (!r.prediction) ++recount[r.condition]["backend_failure"];
            else if (const auto* v = r.prediction->valid())
                ++recount[r.condition][std::string(strategy_id(v->strategy))];
            else ++recount[r.condition]["noise"];
        }
        for (const auto& [condition, dist] : outcome.report.distributions) {
            CHECK(dist.noise == recount[condition]["noise"]);
            for (EmpathyStrategy s : kAllStrategies) {
                CHECK(dist.predicted[static_cast<std::size_t>(s)] ==
                      recount[condition][std::string(strategy_id(s))]);
            }
            std::uint64_t total = dist.total();
            std::uint64_t n_records = 0;
            for (const auto& r : reread.records)
                if (r.condition == condition) ++n_records;
            CHECK(total == n_records);
        }
    }
}

TEST_CASE("run: repeated execution is byte-identical") {
    auto fx = small_fixture("run_repeat");
    run(fx.manifest);
    std::map<std::string, std::string> first;
    for (const char* name : {"records.jsonl", "report.json", "report.md", "report.csv",
                             "distribution.csv"}) {
        first[name] = read_file(fx.dir / "out" / name);
    }
    run(fx.manifest);
    for (const auto& [name, bytes] : first) {
        CHECK(read_file(fx.dir / "out" / name) == bytes);
    }
}

TEST_CASE("run: unsatisfiable sampling target refuses before any backend call") {
    auto fx = small_fixture("run_refuse");
    fx.manifest.sampling.target_per_strategy[EmpathyStrategy::Exploration] =
        SampleTarget::take(50);
    // a backend that would fail loudly if constructed with no cache
    fx.manifest.backend.kind = "replay";
    fx.manifest.backend.cache_path = (fx.dir / "missing.jsonl").string();
    CHECK_THROWS_AS(run(fx.manifest), DatasetError);
    CHECK_FALSE(std::filesystem::exists(fx.dir / "missing.jsonl"));
}

TEST_CASE("run: template pin mismatch refuses to start") {
    auto fx = small_fixture("run_pin");
    fx.manifest.template_version_pin = "tv-0000000000000000";
    CHECK_THROWS_WITH_AS(run(fx.manifest), doctest::Contains("template_version"), Error);
    fx.manifest.template_version_pin = template_version();
    CHECK_NOTHROW(run(fx.manifest));
}

TEST_CASE("run: unscripted pair without default becomes a backend-failure record") {
    auto fx = small_fixture("run_fail");
    fx.manifest.backend.mock_default = std::nullopt;
    RunOutcome outcome = run(fx.manifest);
    CHECK(outcome.partial());
    CHECK(outcome.n_failures > 0);
    const MetricsReport& base = outcome.report.per_condition[0];
    CHECK(base.n_failed > 0);
    CHECK(base.n_failed + base.n_excluded + base.n_evaluated == base.n_total);
    // failures appear in the distribution export
    const std::string dist_csv = export_distribution(outcome.report);
    CHECK(dist_csv.find("backend_failure") != std::string::npos);
}

TEST_CASE("run: resumes from cache and replays byte-identically") {
    auto fx = small_fixture("run_replay", {CoECondition::Base, CoECondition::RtCoE});
    fx.manifest.backend.cache_path = (fx.dir / "cache.jsonl").string();
    RunOutcome recorded = run(fx.manifest);
    const std::string report_json = read_file(fx.dir / "out" / "report.json");
    const std::string records_jsonl = read_file(fx.dir / "out" / "records.jsonl");

    // strict replay from the cache only: no mock script, no live backend
    RunManifest replay = fx.manifest;
    replay.backend = BackendConfig{};
    replay.backend.kind = "replay";
    replay.backend.cache_path = (fx.dir / "cache.jsonl").string();
    replay.backend.strict_replay = true;
    replay.output_dir = (fx.dir / "out_replay").string();
    RunOutcome replayed = run(replay);

    CHECK(replayed.report.per_condition == recorded.report.per_condition);
    CHECK(replayed.report.distributions == recorded.report.distributions);
    // records differ only in manifest digest (backend config changed)
    REQUIRE(replayed.records.records.size() == recorded.records.records.size());
    for (std::size_t i = 0; i < replayed.records.records.size(); ++i) {
        CHECK(replayed.records.records[i].completion_key ==
              recorded.records.records[i].completion_key);
        CHECK(replayed.records.records[i].pair_id == recorded.records.records[i].pair_id);
    }
    // identical manifest (fresh output dir) replays to byte-identical artifacts
    std::filesystem::remove_all(fx.dir / "out");
    RunOutcome replayed_same = run(fx.manifest);
    CHECK(read_file(fx.dir / "out" / "report.json") == report_json);
    CHECK(read_file(fx.dir / "out" / "records.jsonl") == records_jsonl);
}

TEST_CASE("manifest: json round-trip, defaults, digest stability") {
    auto dir = temp_dir("manifest");
    auto files = write_corpus(dir, 2, 2, 2);
    nlohmann::json j{
        {"v", 1},
        {"dataset",
         {{"emotional_reaction", "er.csv"}, {"exploration", "ex.csv"},
          {"interpretation", "in.csv"}}},
        {"sampling", {{"seed", 7}, {"targets", {{"emotional_reaction", 2}, {"exploration", "all"}}}}},
        {"conditions", {"base", "rt_coe"}},
        {"generation", {{"model_id", "m1"}, {"max_tokens", 32}}},
        {"backend", {{"kind", "mock"}, {"mock_default", "Strategy: exploration"}}},
        {"output_dir", "out"}};
    write_file(dir / "manifest.json", j.dump());

    RunManifest m = load_manifest((dir / "manifest.json").string());
    CHECK(m.dataset_files[EmpathyStrategy::EmotionalReaction] == (dir / "er.csv").string());
    CHECK(m.sampling.rng_seed == 7);
    CHECK(m.sampling.target_per_strategy[EmpathyStrategy::EmotionalReaction].count == 2);
    CHECK(m.sampling.target_per_strategy[EmpathyStrategy::Exploration].all);
    CHECK(m.sampling.target_per_strategy[EmpathyStrategy::Interpretation].all); // omitted => all
    CHECK(m.conditions == std::vector<CoECondition>{CoECondition::Base, CoECondition::RtCoE});
    CHECK(m.generation.model_id == "m1");
    CHECK(m.generation.max_tokens == 32);
    CHECK(m.generation.temperature == 0.9); // untouched default
    CHECK(m.output_dir == (dir / "out").string());

    const std::string d1 = manifest_digest(m);
    CHECK(d1.size() == 64);
    CHECK(manifest_digest(m) == d1);
    RunManifest m2 = load_manifest((dir / "manifest.json").string());
    CHECK(manifest_digest(m2) == d1);
    m2.sampling.rng_seed = 8;
    CHECK(manifest_digest(m2) != d1);
}

TEST_CASE("manifest: validation failures") {
    auto dir = temp_dir("manifest_bad");
    nlohmann::json base{
        {"v", 1},
        {"dataset",
         {{"emotional_reaction", "er.csv"}, {"exploration", "ex.csv"},
          {"interpretation", "in.csv"}}},
        {"sampling", {{"seed", 1}, {"targets", nlohmann::json::object()}}},
        {"conditions", {"base"}},
        {"backend", {{"kind", "mock"}}},
        {"output_dir", "out"}};

    SUBCASE("unknown condition") {
        auto j = base;
        j["conditions"] = {"base", "zen_coe"};
        CHECK_THROWS_WITH_AS(manifest_from_json(j.dump()), doctest::Contains("zen_coe"), Error);
    }
    SUBCASE("duplicate condition") {
        auto j = base;
        j["conditions"] = {"base", "base"};
        CHECK_THROWS_AS(manifest_from_json(j.dump()), Error);
    }
    SUBCASE("bad generation params") {
        auto j = base;
        j["generation"] = {{"temperature", 3.0}};
        CHECK_THROWS_AS(manifest_from_json(j.dump()), Error);
    }
    SUBCASE("live requires base_url") {
        auto j = base;
        j["backend"] = {{"kind", "live"}};
        CHECK_THROWS_AS(manifest_from_json(j.dump()), Error);
    }
    SUBCASE("replay requires cache_path") {
        auto j = base;
        j["backend"] = {{"kind", "replay"}};
        CHECK_THROWS_AS(manifest_from_json(j.dump()), Error);
    }
    SUBCASE("unsupported schema version") {
        auto j = base;
        j["v"] = 2;
        CHECK_THROWS_AS(manifest_from_json(j.dump()), Error);
    }
}

TEST_CASE("sample_pairs: paper plan on synthetic corpus yields the 1481-pair list") {
    auto dir = temp_dir("sample_op");
    RunManifest m;
    m.dataset_files = write_corpus(dir, 1047, 481, 1436, /*level0_each=*/10);
    m.sampling.rng_seed = 42;
    m.sampling.target_per_strategy = {
        {EmpathyStrategy::EmotionalReaction, SampleTarget::take(500)},
        {EmpathyStrategy::Exploration, SampleTarget::take_all()},
        {EmpathyStrategy::Interpretation, SampleTarget::take(500)},
    };
    m.conditions = {CoECondition::Base};
    m.backend.kind = "mock";
    m.output_dir = (dir / "out").string();
    auto pairs = sample_pairs(m);
    CHECK(pairs.size() == 1481);
}
