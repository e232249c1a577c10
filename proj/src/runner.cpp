#include "coe/runner.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "coe/backend.hpp"
#include "coe/error.hpp"
#include "coe/records.hpp"

namespace coe {

namespace {

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path + ": cannot open for writing");
    out << bytes;
    out.flush();
    if (!out) throw Error(path + ": write failed");
}

/// Evaluates one condition over the sampled pairs, preserving pair order
/// in the returned records regardless of completion order.
std::vector<EvalRecord> run_condition(CoECondition condition,
                                      const std::vector<SupportPair>& pairs,
                                      const GenerationParams& params, Backend& backend,
                                      int max_in_flight) {
    std::vector<EvalRecord> records(pairs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr hard_error;
    std::mutex hard_error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pairs.size()) return;
            {
                std::lock_guard<std::mutex> lock(hard_error_mutex);
                if (hard_error) return;
            }
            const SupportPair& pair = pairs[i];
            EvalRecord record;
            record.pair_id = pair.pair_id;
            record.condition = condition;
            record.gold_strategy = pair.gold_strategy;
            record.gold_level = pair.gold_level;
            try {
                const PromptText prompt = build_prompt(condition, pair.seeker_post);
                record.completion_key = request_key(prompt.body, params);
                const std::string tag =
                    pair.pair_id + "@" + std::string(condition_id(condition));
                try {
                    const RawCompletion completion = backend.complete(prompt.body, params, tag);
                    record.prediction = parse_completion(completion.completion_text);
                } catch (const BackendError& e) {
                    record.prediction = std::nullopt;
                    record.backend_error = e.what();
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(hard_error_mutex);
                if (!hard_error) hard_error = std::current_exception();
                return;
            }
            records[i] = std::move(record);
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(std::max(1, max_in_flight), std::max<std::size_t>(1, pairs.size()));
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(worker);
    for (auto& t : workers) t.join();
    if (hard_error) std::rethrow_exception(hard_error);
    return records;
}

} // namespace

std::vector<SupportPair> sample_pairs(const RunManifest& manifest) {
    auto corpus = load_corpus(manifest.dataset_files);
    auto filtered = filter_level_zero(corpus);
    return balance_sample(filtered, manifest.sampling);
}

RunOutcome run(const RunManifest& manifest) {
    manifest.validate();
    if (manifest.template_version_pin && *manifest.template_version_pin != template_version()) {
        throw Error("manifest pins template_version " + *manifest.template_version_pin +
                    " but the built-in templates are " + template_version() +
                    "; refusing to run");
    }

    // Dataset errors and unsatisfiable plans refuse the run before any
    // backend is constructed or contacted.
    const std::vector<SupportPair> sampled = sample_pairs(manifest);

    auto backend = make_backend(manifest.backend);

    RecordsFile records;
    records.manifest_digest = manifest_digest(manifest);
    records.sampler_id = kSamplerId;
    records.template_version = template_version();
    records.conditions = manifest.conditions;
    records.n_pairs = sampled.size();

    RunOutcome outcome;
    for (CoECondition condition : manifest.conditions) {
        auto condition_records = run_condition(condition, sampled, manifest.generation,
                                               *backend, manifest.backend.max_in_flight);
        std::size_t failures = 0;
        for (const EvalRecord& r : condition_records) {
            if (!r.prediction) ++failures;
        }
        outcome.failures_per_condition[condition] = failures;
        outcome.n_failures += failures;
        records.records.insert(records.records.end(),
                               std::make_move_iterator(condition_records.begin()),
                               std::make_move_iterator(condition_records.end()));
    }

    std::filesystem::create_directories(manifest.output_dir);
    write_records(records, (std::filesystem::path(manifest.output_dir) / "records.jsonl").string());

    outcome.report = build_run_report(records);
    outcome.report.generated_at = utc_now_rfc3339();
    write_report_artifacts(outcome.report, manifest.output_dir);
    outcome.records = std::move(records);
    return outcome;
}

void write_report_artifacts(const RunReport& report, const std::string& output_dir) {
    std::filesystem::create_directories(output_dir);
    const std::filesystem::path dir(output_dir);
    write_file((dir / "report.json").string(), render_table(report, TableFormat::Json));
    write_file((dir / "report.md").string(), render_table(report, TableFormat::Markdown));
    write_file((dir / "report.csv").string(), render_table(report, TableFormat::Csv));
    write_file((dir / "distribution.csv").string(), export_distribution(report));
}

RunReport score_records(const std::string& records_path, std::string output_dir) {
    const RecordsFile records = read_records(records_path);
    RunReport report = build_run_report(records);
    report.generated_at = utc_now_rfc3339();
    if (output_dir.empty()) {
        output_dir = std::filesystem::path(records_path).parent_path().string();
        if (output_dir.empty()) output_dir = ".";
    }
    write_report_artifacts(report, output_dir);
    return report;
}

} // namespace coe
