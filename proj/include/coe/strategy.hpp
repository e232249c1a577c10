#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace coe {

/// The three empathy strategies of the EPITOME taxonomy. The enum order is
/// the fixed corpus order used for file concatenation and sampling output.
enum class EmpathyStrategy : std::uint8_t {
    EmotionalReaction = 0,
    Exploration = 1,
    Interpretation = 2,
};

inline constexpr std::array<EmpathyStrategy, 3> kAllStrategies = {
    EmpathyStrategy::EmotionalReaction,
    EmpathyStrategy::Exploration,
    EmpathyStrategy::Interpretation,
};

/// Strength of an expressed strategy; integer codes 0/1/2 round-trip
/// through parsing.
enum class CommunicationLevel : std::uint8_t {
    NoExpression = 0,
    Weak = 1,
    Strong = 2,
};

/// Snake_case identifiers used in manifests, records and report files.
std::string_view strategy_id(EmpathyStrategy s);
/// Human-readable name, also the form requested from the model.
std::string_view strategy_name(EmpathyStrategy s);

std::string_view level_id(CommunicationLevel l);
std::string_view level_name(CommunicationLevel l);

std::optional<EmpathyStrategy> strategy_from_id(std::string_view id);
std::optional<CommunicationLevel> level_from_id(std::string_view id);
std::optional<CommunicationLevel> level_from_code(int code);

} // namespace coe
