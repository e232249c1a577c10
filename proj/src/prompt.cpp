#include "coe/prompt.hpp"

#include <sstream>

#include "coe/error.hpp"
#include "coe/hash.hpp"

namespace coe {

namespace {

// Template literals. template_version() hashes every byte below, so any
// edit produces a new version string.

constexpr std::string_view kRolePreamble =
    "You are an empathetic counselor. Your goal is {goal}. "
    "Your reasoning style is {reasoning}.\n\n";

constexpr std::string_view kReasoningSteps =
    "Before you answer, reason through these steps:\n"
    "1. Identify any word that represents the client's emotion.\n"
    "2. Understand the individual/situational factors that may have led to "
    "the expression in the client's message.\n\n";

constexpr std::string_view kClassificationInstruction =
    "Read the client's message below. Choose exactly one empathetic "
    "strategy from these three options: emotional reaction, exploration, "
    "interpretation. Choose exactly one communication level from these "
    "three options: no expression, weak, strong. Then write an empathetic "
    "response to the client.\n\n";

constexpr std::string_view kOutputContract =
    "Answer in exactly this format:\n"
    "Strategy: <one of: emotional reaction | exploration | interpretation>\n"
    "Level: <one of: weak | strong>\n"
    "Response: <free text>\n\n";

constexpr std::string_view kFenceIntro =
    "The client's message is between the markers.\n";

constexpr std::string_view kBeginMarker = "BEGIN_CLIENT_POST";
constexpr std::string_view kEndMarker = "END_CLIENT_POST";

std::string replace_once(std::string text, std::string_view placeholder, std::string_view value) {
    auto pos = text.find(placeholder);
    if (pos != std::string::npos) text.replace(pos, placeholder.size(), value);
    return text;
}

std::string trimmed_copy(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

std::string_view condition_id(CoECondition c) {
    switch (c) {
    case CoECondition::Base: return "base";
    case CoECondition::CbtCoE: return "cbt_coe";
    case CoECondition::DbtCoE: return "dbt_coe";
    case CoECondition::PctCoE: return "pct_coe";
    case CoECondition::RtCoE: return "rt_coe";
    }
    return "base";
}

std::string_view condition_name(CoECondition c) {
    switch (c) {
    case CoECondition::Base: return "Base";
    case CoECondition::CbtCoE: return "CBT-CoE";
    case CoECondition::DbtCoE: return "DBT-CoE";
    case CoECondition::PctCoE: return "PCT-CoE";
    case CoECondition::RtCoE: return "RT-CoE";
    }
    return "Base";
}

std::optional<CoECondition> condition_from_id(std::string_view id) {
    for (CoECondition c : kAllConditions) {
        if (condition_id(c) == id) return c;
    }
    return std::nullopt;
}

std::optional<ConditionDescriptor> condition_descriptor(CoECondition c) {
    switch (c) {
    case CoECondition::Base:
        return std::nullopt;
    case CoECondition::CbtCoE:
        return ConditionDescriptor{"Cognitive reframing", "Tackling negative thought patterns"};
    case CoECondition::DbtCoE:
        return ConditionDescriptor{"Emotion regulation", "Addressing emotional dysregulation"};
    case CoECondition::PctCoE:
        return ConditionDescriptor{"Self-understanding", "Enhancing self-awareness"};
    case CoECondition::RtCoE:
        return ConditionDescriptor{"Problem-focused coping", "Identifying cause of the dissatisfaction"};
    }
    return std::nullopt;
}

const std::string& template_version() {
    static const std::string version = [] {
        std::string all;
        for (std::string_view part :
             {kRolePreamble, kReasoningSteps, kClassificationInstruction,
              kOutputContract, kFenceIntro, kBeginMarker, kEndMarker}) {
            all += part;
            all += '\x1f'; // keep part boundaries distinct
        }
        return "tv-" + sha256_hex(all).substr(0, 16);
    }();
    return version;
}

PromptText build_prompt(CoECondition condition, const std::string& seeker_post) {
    if (trimmed_copy(seeker_post).empty()) {
        throw Error("build_prompt: empty seeker post");
    }
    std::string body;
    if (auto desc = condition_descriptor(condition)) {
        body += replace_once(
            replace_once(std::string(kRolePreamble), "{goal}", desc->goal),
            "{reasoning}", desc->reasoning);
        body += kReasoningSteps;
    }
    body += kClassificationInstruction;
    body += kOutputContract;
    body += kFenceIntro;
    body += kBeginMarker;
    body += '\n';
    body += seeker_post;
    body += '\n';
    body += kEndMarker;
    body += '\n';
    return PromptText{std::move(body), condition, template_version()};
}

std::optional<std::string> extract_seeker_post(const std::string& body) {
    // The post is the bytes between the first BEGIN marker line and the
    // last END marker line, minus the single newline the template appends
    // after the post. Taking the first BEGIN and the last END keeps the
    // extraction unambiguous even when the post itself contains marker
    // lines.
    const std::string begin_line = std::string(kBeginMarker) + "\n";
    std::size_t begin = std::string::npos;
    std::size_t pos = body.find(begin_line);
    while (pos != std::string::npos) {
        if (pos == 0 || body[pos - 1] == '\n') {
            begin = pos;
            break;
        }
        pos = body.find(begin_line, pos + 1);
    }
    if (begin == std::string::npos) return std::nullopt;
    const std::size_t post_start = begin + begin_line.size();

    const std::string end_line = std::string("\n") + std::string(kEndMarker) + "\n";
    const std::size_t end = body.rfind(end_line);
    if (end == std::string::npos || end < post_start) return std::nullopt;
    return body.substr(post_start, end - post_start);
}

} // namespace coe
