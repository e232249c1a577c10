#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coe/backend.hpp"
#include "coe/csv.hpp"
#include "coe/error.hpp"
#include "coe/runner.hpp"

namespace {

struct Overrides {
    std::string backend_kind;
    std::string base_url;
    std::optional<std::uint64_t> seed;
};

coe::RunManifest load_with_overrides(const std::string& manifest_path, const Overrides& o) {
    coe::RunManifest manifest = coe::load_manifest(manifest_path);
    if (!o.backend_kind.empty()) manifest.backend.kind = o.backend_kind;
    if (!o.base_url.empty()) manifest.backend.base_url = o.base_url;
    if (o.seed) manifest.sampling.rng_seed = *o.seed;
    manifest.validate();
    return manifest;
}

int cmd_run(const std::string& manifest_path, const Overrides& overrides) {
    const coe::RunManifest manifest = load_with_overrides(manifest_path, overrides);
    const coe::RunOutcome outcome = coe::run(manifest);

    for (const coe::MetricsReport& m : outcome.report.per_condition) {
        std::cout << coe::condition_name(m.condition) << ": n=" << m.n_total
                  << " evaluated=" << m.n_evaluated << " excluded=" << m.n_excluded
                  << " failed=" << m.n_failed << " acc=" << m.accuracy << "\n";
    }
    std::cout << "artifacts written to " << manifest.output_dir << "\n";
    if (outcome.partial()) {
        std::cerr << "warning: " << outcome.n_failures
                  << " pair(s) failed at the backend after retries; metrics exclude them\n";
        for (const auto& [condition, failures] : outcome.failures_per_condition) {
            if (failures == 0) continue;
            std::cerr << "  " << coe::condition_name(condition) << ": " << failures
                      << " failed of " << outcome.records.n_pairs << "\n";
        }
        return 2;
    }
    return 0;
}

int cmd_sample(const std::string& manifest_path, const Overrides& overrides) {
    const coe::RunManifest manifest = load_with_overrides(manifest_path, overrides);
    const auto pairs = coe::sample_pairs(manifest);
    std::cout << "pair_id,gold_strategy,gold_level\n";
    for (const coe::SupportPair& p : pairs) {
        std::cout << coe::csv_escape(p.pair_id) << "," << coe::strategy_id(p.gold_strategy)
                  << "," << coe::level_id(p.gold_level) << "\n";
    }
    return 0;
}

int cmd_score(const std::string& records_path, const std::string& out_dir) {
    coe::score_records(records_path, out_dir);
    std::cout << "report artifacts written\n";
    return 0;
}

int cmd_cache_ls(const std::string& cache_path) {
    const coe::CacheIndex index = coe::CacheIndex::load(cache_path);
    for (const coe::RawCompletion& c : index.entries()) {
        std::cout << c.request_key << " " << c.backend_kind << " " << c.created_at << " "
                  << c.completion_text.size() << "B\n";
    }
    const coe::CacheStats& stats = index.stats();
    std::cerr << stats.unique_keys << " unique key(s), " << stats.duplicate_keys
              << " superseded duplicate(s)\n";
    if (stats.torn_tail) {
        std::cerr << "warning: torn trailing line ignored (" << stats.torn_tail_detail << ")\n";
    }
    return 0;
}

int cmd_cache_verify(const std::string& cache_path) {
    const coe::CacheIndex index = coe::CacheIndex::load(cache_path);
    const coe::CacheStats& stats = index.stats();
    std::cout << "ok: " << stats.entries_read << " entr" << (stats.entries_read == 1 ? "y" : "ies")
              << ", " << stats.unique_keys << " unique key(s), " << stats.duplicate_keys
              << " superseded duplicate(s)\n";
    if (stats.torn_tail) {
        std::cerr << "warning: torn trailing line ignored (" << stats.torn_tail_detail << ")\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chain-of-Empathy prompt evaluation harness"};
    app.require_subcommand(1);

    Overrides overrides;
    std::string manifest_path;
    std::string records_path;
    std::string cache_path;
    std::string out_dir;

    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--backend", overrides.backend_kind, "Override backend kind")
            ->check(CLI::IsMember({"live", "replay", "mock"}));
        cmd->add_option("--base-url", overrides.base_url, "Override live backend base URL");
        cmd->add_option("--seed", overrides.seed, "Override sampling seed");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "Execute the full evaluation pipeline");
    run_cmd->add_option("--manifest", manifest_path, "Run manifest (JSON)")->required();
    add_overrides(run_cmd);

    CLI::App* sample_cmd = app.add_subcommand("sample", "Print the sampled pair list");
    sample_cmd->add_option("--manifest", manifest_path, "Run manifest (JSON)")->required();
    add_overrides(sample_cmd);

    CLI::App* score_cmd = app.add_subcommand("score", "Recompute the report from records.jsonl");
    score_cmd->add_option("--records", records_path, "records.jsonl path")->required();
    score_cmd->add_option("--out", out_dir, "Output directory (defaults to the records' directory)");

    CLI::App* cache_cmd = app.add_subcommand("cache", "Inspect or validate a completion cache");
    cache_cmd->require_subcommand(1);
    CLI::App* ls_cmd = cache_cmd->add_subcommand("ls", "List cache entries");
    ls_cmd->add_option("--cache", cache_path, "Cache file (JSONL)")->required();
    CLI::App* verify_cmd = cache_cmd->add_subcommand("verify", "Validate a cache file");
    verify_cmd->add_option("--cache", cache_path, "Cache file (JSONL)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run_cmd)) return cmd_run(manifest_path, overrides);
        if (app.got_subcommand(sample_cmd)) return cmd_sample(manifest_path, overrides);
        if (app.got_subcommand(score_cmd)) return cmd_score(records_path, out_dir);
        if (app.got_subcommand(cache_cmd)) {
            if (cache_cmd->got_subcommand(ls_cmd)) return cmd_cache_ls(cache_path);
            return cmd_cache_verify(cache_path);
        }
    } catch (const coe::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
