#include "coe/strategy.hpp"

namespace coe {

std::string_view strategy_id(EmpathyStrategy s) {
    switch (s) {
    case EmpathyStrategy::EmotionalReaction: return "emotional_reaction";
    case EmpathyStrategy::Exploration: return "exploration";
    case EmpathyStrategy::Interpretation: return "interpretation";
    }
    return "emotional_reaction";
}

std::string_view strategy_name(EmpathyStrategy s) {
    switch (s) {
    case EmpathyStrategy::EmotionalReaction: return "emotional reaction";
    case EmpathyStrategy::Exploration: return "exploration";
    case EmpathyStrategy::Interpretation: return "interpretation";
    }
    return "emotional reaction";
}

std::string_view level_id(CommunicationLevel l) {
    switch (l) {
    case CommunicationLevel::NoExpression: return "no_expression";
    case CommunicationLevel::Weak: return "weak";
    case CommunicationLevel::Strong: return "strong";
    }
    return "no_expression";
}

std::string_view level_name(CommunicationLevel l) {
    switch (l) {
    case CommunicationLevel::NoExpression: return "no expression";
    case CommunicationLevel::Weak: return "weak";
    case CommunicationLevel::Strong: return "strong";
    }
    return "no expression";
}

std::optional<EmpathyStrategy> strategy_from_id(std::string_view id) {
    for (EmpathyStrategy s : kAllStrategies) {
        if (strategy_id(s) == id) return s;
    }
    return std::nullopt;
}

std::optional<CommunicationLevel> level_from_id(std::string_view id) {
    if (id == "no_expression") return CommunicationLevel::NoExpression;
    if (id == "weak") return CommunicationLevel::Weak;
    if (id == "strong") return CommunicationLevel::Strong;
    return std::nullopt;
}

std::optional<CommunicationLevel> level_from_code(int code) {
    switch (code) {
    case 0: return CommunicationLevel::NoExpression;
    case 1: return CommunicationLevel::Weak;
    case 2: return CommunicationLevel::Strong;
    default: return std::nullopt;
    }
}

} // namespace coe
