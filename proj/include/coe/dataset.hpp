#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coe/strategy.hpp"

namespace coe {

/// One seeker post + gold labels; the unit of evaluation.
struct SupportPair {
    std::string pair_id; // "<sp_id>:<rp_id>"
    std::string seeker_post;
    std::string response_post;
    EmpathyStrategy gold_strategy{};
    CommunicationLevel gold_level{};
};

/// Per-strategy sampling target: a count, or everything that survived the
/// level filter.
struct SampleTarget {
    bool all = true;
    std::size_t count = 0;

    static SampleTarget take_all() { return SampleTarget{true, 0}; }
    static SampleTarget take(std::size_t n) { return SampleTarget{false, n}; }
};

struct SamplingPlan {
    std::map<EmpathyStrategy, SampleTarget> target_per_strategy;
    std::uint64_t rng_seed = 0;
};

/// Identity of the sampling algorithm, recorded in run artifacts so a
/// selection can be reproduced by an independent implementation:
/// per-strategy std::mt19937_64 seeded via std::seed_seq{seed_lo32,
/// seed_hi32, strategy_ordinal}, unbiased bounded draws by rejection
/// sampling on the top of the 64-bit range, a partial Fisher-Yates pass
/// selecting the first n slots, selected indices emitted in ascending
/// (original corpus) order.
extern const char* const kSamplerId;

/// Loads one CSV per strategy (header sp_id,rp_id,seeker_post,response_post,level)
/// and concatenates them in the fixed order EmotionalReaction, Exploration,
/// Interpretation, preserving row order per file. Level-0 rows are kept.
/// Throws DatasetError with file + line on any malformed input.
std::vector<SupportPair> load_corpus(const std::map<EmpathyStrategy, std::string>& file_per_strategy);

/// Drops pairs whose gold level is NoExpression, preserving order.
std::vector<SupportPair> filter_level_zero(const std::vector<SupportPair>& pairs);

/// Draws the plan's per-strategy sample without replacement. Output is
/// grouped by strategy in the fixed order; "all" targets pass through in
/// input order. Same seed, same input => identical selection on every
/// conforming platform. Throws DatasetError before any sampling if a
/// target exceeds the available count.
std::vector<SupportPair> balance_sample(const std::vector<SupportPair>& pairs,
                                        const SamplingPlan& plan);

/// Post-filter pair count per strategy.
std::map<EmpathyStrategy, std::size_t> count_per_strategy(const std::vector<SupportPair>& pairs);

} // namespace coe
