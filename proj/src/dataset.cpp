#include "coe/dataset.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <unordered_set>

#include "coe/csv.hpp"
#include "coe/error.hpp"

namespace coe {

const char* const kSamplerId = "mt19937_64-seedseq-fisheryates-v1";

namespace {

const std::vector<std::string> kHeader = {"sp_id", "rp_id", "seeker_post", "response_post", "level"};

[[noreturn]] void fail(const std::string& file, std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << file << ":" << line << ": " << what;
    throw DatasetError(msg.str());
}

std::string trimmed(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool blank_record(const CsvRecord& rec) {
    return rec.fields.size() == 1 && trimmed(rec.fields[0]).empty();
}

/// Uniform draw in [0, bound) from raw engine output. Rejects the biased
/// top of the 64-bit range so the result is exact for any bound, and the
/// draw sequence is identical on every conforming implementation.
std::uint64_t bounded_draw(std::mt19937_64& eng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v = eng();
    while (v >= limit) v = eng();
    return v % bound;
}

std::mt19937_64 strategy_engine(std::uint64_t seed, std::uint32_t ordinal) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      ordinal};
    return std::mt19937_64(seq);
}

} // namespace

std::vector<SupportPair> load_corpus(const std::map<EmpathyStrategy, std::string>& file_per_strategy) {
    std::vector<SupportPair> corpus;
    std::unordered_set<std::string> seen_ids;

    for (EmpathyStrategy strategy : kAllStrategies) {
        auto it = file_per_strategy.find(strategy);
        if (it == file_per_strategy.end()) {
            throw DatasetError(std::string("no dataset file configured for strategy '") +
                               std::string(strategy_id(strategy)) + "'");
        }
        const std::string& path = it->second;
        auto records = read_csv_file(path);
        if (records.empty()) {
            fail(path, 1, "missing header row");
        }
        if (records.front().fields != kHeader) {
            fail(path, records.front().line,
                 "malformed header, expected sp_id,rp_id,seeker_post,response_post,level");
        }
        for (std::size_t r = 1; r < records.size(); ++r) {
            const CsvRecord& rec = records[r];
            if (blank_record(rec)) continue;
            if (rec.fields.size() != 5) {
                fail(path, rec.line, "expected 5 fields, got " + std::to_string(rec.fields.size()));
            }
            SupportPair pair;
            pair.pair_id = rec.fields[0] + ":" + rec.fields[1];
            pair.seeker_post = rec.fields[2];
            pair.response_post = rec.fields[3];
            pair.gold_strategy = strategy;

            if (trimmed(pair.seeker_post).empty()) fail(path, rec.line, "empty seeker_post");
            if (trimmed(pair.response_post).empty()) fail(path, rec.line, "empty response_post");

            const std::string level_text = trimmed(rec.fields[4]);
            std::optional<CommunicationLevel> level;
            if (level_text.size() == 1 && level_text[0] >= '0' && level_text[0] <= '9') {
                level = level_from_code(level_text[0] - '0');
            }
            if (!level) fail(path, rec.line, "level must be 0, 1 or 2, got '" + rec.fields[4] + "'");
            pair.gold_level = *level;

            if (!seen_ids.insert(pair.pair_id).second) {
                fail(path, rec.line, "duplicate pair_id '" + pair.pair_id + "'");
            }
            corpus.push_back(std::move(pair));
        }
    }
    return corpus;
}

std::vector<SupportPair> filter_level_zero(const std::vector<SupportPair>& pairs) {
    std::vector<SupportPair> out;
    out.reserve(pairs.size());
    for (const SupportPair& p : pairs) {
        if (p.gold_level != CommunicationLevel::NoExpression) out.push_back(p);
    }
    return out;
}

std::map<EmpathyStrategy, std::size_t> count_per_strategy(const std::vector<SupportPair>& pairs) {
    std::map<EmpathyStrategy, std::size_t> counts;
    for (EmpathyStrategy s : kAllStrategies) counts[s] = 0;
    for (const SupportPair& p : pairs) ++counts[p.gold_strategy];
    return counts;
}

std::vector<SupportPair> balance_sample(const std::vector<SupportPair>& pairs,
                                        const SamplingPlan& plan) {
    // Partition indices by strategy, preserving input order.
    std::array<std::vector<std::size_t>, 3> by_strategy;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        by_strategy[static_cast<std::size_t>(pairs[i].gold_strategy)].push_back(i);
    }

    // Validate every target before selecting anything.
    for (EmpathyStrategy s : kAllStrategies) {
        auto it = plan.target_per_strategy.find(s);
        if (it == plan.target_per_strategy.end() || it->second.all) continue;
        const std::size_t available = by_strategy[static_cast<std::size_t>(s)].size();
        if (it->second.count > available) {
            std::ostringstream msg;
            msg << "sampling target " << it->second.count << " for strategy '"
                << strategy_id(s) << "' exceeds available count " << available;
            throw DatasetError(msg.str());
        }
    }

    std::vector<SupportPair> out;
    for (EmpathyStrategy s : kAllStrategies) {
        const auto ordinal = static_cast<std::uint32_t>(s);
        auto& indices = by_strategy[ordinal];
        auto it = plan.target_per_strategy.find(s);
        const bool take_all = (it == plan.target_per_strategy.end()) || it->second.all;
        if (!take_all) {
            const std::size_t n = it->second.count;
            auto eng = strategy_engine(plan.rng_seed, ordinal);
            // Partial Fisher-Yates: after i swaps, indices[0..i) is a
            // uniform sample without replacement.
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(
                    bounded_draw(eng, static_cast<std::uint64_t>(indices.size() - i)));
                std::swap(indices[i], indices[j]);
            }
            indices.resize(n);
            std::sort(indices.begin(), indices.end());
        }
        for (std::size_t idx : indices) out.push_back(pairs[idx]);
    }
    return out;
}

} // namespace coe
