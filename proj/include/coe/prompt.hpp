#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace coe {

/// The five prompt conditions: Base (no reasoning) plus four
/// psychotherapy-grounded reasoning variants.
enum class CoECondition : std::uint8_t {
    Base = 0,
    CbtCoE = 1,
    DbtCoE = 2,
    PctCoE = 3,
    RtCoE = 4,
};

inline constexpr std::array<CoECondition, 5> kAllConditions = {
    CoECondition::Base, CoECondition::CbtCoE, CoECondition::DbtCoE,
    CoECondition::PctCoE, CoECondition::RtCoE,
};

/// Therapy goal + reasoning style behind a CoE variant.
struct ConditionDescriptor {
    std::string_view goal;
    std::string_view reasoning;
};

struct PromptText {
    std::string body;
    CoECondition condition{};
    std::string template_version;
};

std::string_view condition_id(CoECondition c);   // "base", "cbt_coe", ...
std::string_view condition_name(CoECondition c); // "Base", "CBT-CoE", ...
std::optional<CoECondition> condition_from_id(std::string_view id);

/// Goal/reasoning pair for the four therapy variants; nullopt for Base.
std::optional<ConditionDescriptor> condition_descriptor(CoECondition c);

/// Assembles the full prompt body for one condition and seeker post.
/// Deterministic: same inputs produce identical bytes. Throws Error on an
/// empty (after trimming) seeker post.
PromptText build_prompt(CoECondition condition, const std::string& seeker_post);

/// Recovers the seeker post embedded by build_prompt. Returns nullopt if
/// the body does not contain a well-formed post block. Inverse of the
/// embedding for every post, including posts that contain marker text.
std::optional<std::string> extract_seeker_post(const std::string& body);

/// Hash-derived version of the template literals; changes whenever any
/// template byte changes.
const std::string& template_version();

} // namespace coe
