#include "coe/parser.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

namespace coe {

namespace {

constexpr std::size_t kExcerptBytes = 500;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Trim plus collapse of internal whitespace runs to single spaces.
std::string normalize_ws(std::string_view s) {
    std::string out;
    bool in_ws = true; // swallow leading whitespace
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            if (!in_ws) out += ' ';
            in_ws = true;
        } else {
            out += c;
            in_ws = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

/// Strips markdown emphasis, surrounding quotes and trailing punctuation
/// from a labeled-line value before table lookup. Deliberately shallow:
/// decoration removal only, never rewriting the label itself.
std::string cleanup_value(std::string_view s) {
    std::string v = normalize_ws(s);
    auto strip = [&](char c) {
        while (!v.empty() && v.front() == c) v.erase(v.begin());
        while (!v.empty() && v.back() == c) v.pop_back();
    };
    for (int pass = 0; pass < 2; ++pass) {
        strip('*');
        strip('_');
        strip('"');
        strip('\'');
        strip('`');
        while (!v.empty() && (v.back() == '.' || v.back() == ',' || v.back() == ';' ||
                              v.back() == '!' || v.back() == ':')) {
            v.pop_back();
        }
        v = normalize_ws(v);
    }
    return v;
}

const std::vector<std::pair<std::string, EmpathyStrategy>>& synonym_table() {
    static const std::vector<std::pair<std::string, EmpathyStrategy>> table = {
        {"emotional reaction", EmpathyStrategy::EmotionalReaction},
        {"emotion reaction", EmpathyStrategy::EmotionalReaction},
        {"emotional reactions", EmpathyStrategy::EmotionalReaction},
        {"explorations", EmpathyStrategy::Exploration},
        {"exploration", EmpathyStrategy::Exploration},
        {"interpretations", EmpathyStrategy::Interpretation},
        {"interpretation", EmpathyStrategy::Interpretation},
    };
    return table;
}

const std::vector<std::string>& refusal_phrases() {
    static const std::vector<std::string> phrases = {
        "no empathy strategy",
        "no empathetic strategy",
        "no suitable strategy",
        "cannot determine a strategy",
        "unable to determine a strategy",
    };
    return phrases;
}

// {name} expands to the synonym alternation. Patterns are matched per
// line, case-insensitively. Salvage accepts a name only when it is
// declared as the choice; bare prose mentions never count.
const std::vector<std::string>& declaration_pattern_templates() {
    static const std::vector<std::string> patterns = {
        R"(^\s*(?:the\s+)?({name})\s*:)",
        R"(\bi(?:'d|'ll)?\s+(?:(?:would|will|am\s+going\s+to)\s+)?(?:use|choose|chose|select|pick|go\s+with|recommend)\s+(?:the\s+)?["']?({name})\b)",
        R"(\b(?:best|most\s+(?:suitable|appropriate|fitting)|chosen|selected|suggested|recommended)\s+(?:empath(?:y|etic)\s+)?strategy\s*(?:is|would\s+be|:)\s*["']?(?:the\s+)?({name})\b)",
    };
    return patterns;
}

std::string synonym_alternation() {
    std::string alt;
    for (const auto& [name, strategy] : synonym_table()) {
        if (!alt.empty()) alt += '|';
        std::string spaced = name;
        // allow any whitespace run between words
        std::string pattern;
        for (char c : spaced) {
            if (c == ' ') pattern += R"(\s+)";
            else pattern += c;
        }
        alt += pattern;
    }
    return alt;
}

std::string expand_pattern(const std::string& tmpl) {
    static const std::string alt = synonym_alternation();
    std::string out = tmpl;
    auto pos = out.find("{name}");
    while (pos != std::string::npos) {
        out.replace(pos, 6, alt);
        pos = out.find("{name}", pos + alt.size());
    }
    return out;
}

const std::vector<std::regex>& declaration_regexes() {
    static const std::vector<std::regex> regexes = [] {
        std::vector<std::regex> out;
        for (const auto& tmpl : declaration_pattern_templates()) {
            out.emplace_back(expand_pattern(tmpl), std::regex::icase | std::regex::ECMAScript);
        }
        return out;
    }();
    return regexes;
}

// Labeled lines: optional list/emphasis decoration, optional
// "empathy"/"empathetic"/"the" qualifiers, then the label and a colon.
const std::regex& strategy_label_regex() {
    static const std::regex re(
        R"(^[\s*#>\-]*(?:the\s+)?(?:empath(?:y|etic)\s+)?strategy\s*:\s*(.*)$)",
        std::regex::icase | std::regex::ECMAScript);
    return re;
}

const std::regex& level_label_regex() {
    static const std::regex re(
        R"(^[\s*#>\-]*(?:the\s+)?(?:communication\s+)?level\s*:\s*(.*)$)",
        std::regex::icase | std::regex::ECMAScript);
    return re;
}

const std::regex& response_label_regex() {
    static const std::regex re(R"(^[\s*#>\-]*response\s*:\s*(.*)$)",
                               std::regex::icase | std::regex::ECMAScript);
    return re;
}

struct Line {
    std::string text;
    std::size_t end_offset; // offset one past this line's terminator
};

std::vector<Line> split_lines(const std::string& text) {
    std::vector<Line> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back({text.substr(start), text.size()});
            break;
        }
        std::string line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back({std::move(line), nl + 1});
        start = nl + 1;
    }
    return lines;
}

bool contains_refusal(const std::string& lowered) {
    for (const auto& phrase : refusal_phrases()) {
        if (lowered.find(phrase) != std::string::npos) return true;
    }
    return false;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

std::optional<EmpathyStrategy> canonicalize_strategy(std::string_view label) {
    const std::string key = lower(normalize_ws(label));
    for (const auto& [name, strategy] : synonym_table()) {
        if (key == name) return strategy;
    }
    return std::nullopt;
}

std::optional<CommunicationLevel> canonicalize_level(std::string_view label) {
    const std::string key = lower(normalize_ws(label));
    if (key == "no expression" || key == "none") return CommunicationLevel::NoExpression;
    if (key == "weak") return CommunicationLevel::Weak;
    if (key == "strong") return CommunicationLevel::Strong;
    return std::nullopt;
}

std::string sanitize_utf8(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    const auto n = bytes.size();
    auto cont = [&](std::size_t k) {
        return i + k < n && (static_cast<unsigned char>(bytes[i + k]) & 0xC0) == 0x80;
    };
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(bytes[i]);
        std::size_t len = 0;
        if (b0 < 0x80) {
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0 && b0 >= 0xC2 && cont(1)) {
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
            const auto b1 = static_cast<unsigned char>(bytes[i + 1]);
            const bool overlong = (b0 == 0xE0 && b1 < 0xA0);
            const bool surrogate = (b0 == 0xED && b1 >= 0xA0);
            if (!overlong && !surrogate) len = 3;
        } else if ((b0 & 0xF8) == 0xF0 && b0 <= 0xF4 && cont(1) && cont(2) && cont(3)) {
            const auto b1 = static_cast<unsigned char>(bytes[i + 1]);
            const bool overlong = (b0 == 0xF0 && b1 < 0x90);
            const bool too_big = (b0 == 0xF4 && b1 >= 0x90);
            if (!overlong && !too_big) len = 4;
        }
        if (len == 0) {
            out += "\xEF\xBF\xBD"; // U+FFFD
            ++i;
        } else {
            out.append(bytes.substr(i, len));
            i += len;
        }
    }
    return out;
}

std::string bounded_excerpt(std::string_view text) {
    if (text.size() <= kExcerptBytes) return std::string(text);
    std::size_t cut = kExcerptBytes;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    return std::string(text.substr(0, cut));
}

const ParserLexicon& parser_lexicon() {
    static const ParserLexicon lexicon = {
        "lex-1",
        synonym_table(),
        refusal_phrases(),
        declaration_pattern_templates(),
    };
    return lexicon;
}

ParsedPrediction parse_completion(const std::string& raw) {
    const std::string text = sanitize_utf8(raw);
    const std::vector<Line> lines = split_lines(text);

    auto noise = [&](NoiseKind kind, std::string label) {
        return ParsedPrediction{NoisePrediction{kind, std::move(label), bounded_excerpt(text)}};
    };

    // Shared extraction of the optional Level and Response fields.
    auto find_level = [&]() -> std::optional<CommunicationLevel> {
        for (const Line& line : lines) {
            std::smatch m;
            if (std::regex_match(line.text, m, level_label_regex())) {
                return canonicalize_level(cleanup_value(m[1].str()));
            }
        }
        return std::nullopt;
    };
    auto find_response = [&]() -> std::string {
        for (std::size_t k = 0; k < lines.size(); ++k) {
            std::smatch m;
            if (!std::regex_match(lines[k].text, m, response_label_regex())) continue;
            // Free text runs from the label until the next labeled line.
            std::string body = m[1].str();
            for (std::size_t j = k + 1; j < lines.size(); ++j) {
                std::smatch skip;
                if (std::regex_match(lines[j].text, skip, strategy_label_regex()) ||
                    std::regex_match(lines[j].text, skip, level_label_regex())) {
                    break;
                }
                body += "\n" + lines[j].text;
            }
            return trim(body);
        }
        return "";
    };

    // Tier 1: labeled Strategy line.
    for (const Line& line : lines) {
        std::smatch m;
        if (!std::regex_match(line.text, m, strategy_label_regex())) continue;
        const std::string value = cleanup_value(m[1].str());
        if (auto strategy = canonicalize_strategy(value)) {
            return ParsedPrediction{ValidPrediction{*strategy, find_level(), find_response()}};
        }
        if (contains_refusal(lower(value))) {
            return noise(NoiseKind::NoStrategy, value);
        }
        return noise(NoiseKind::UnknownStrategy, value);
    }

    // Refusal / failed retrieval without any labeled line.
    if (contains_refusal(lower(text))) {
        return noise(NoiseKind::NoStrategy, "");
    }

    // Tier 2 (salvage): exactly one canonical name declared as the choice.
    std::set<EmpathyStrategy> declared;
    for (const Line& line : lines) {
        for (const std::regex& re : declaration_regexes()) {
            std::smatch m;
            if (std::regex_search(line.text, m, re)) {
                if (auto strategy = canonicalize_strategy(m[1].str())) {
                    declared.insert(*strategy);
                }
            }
        }
    }
    if (declared.size() == 1) {
        return ParsedPrediction{ValidPrediction{*declared.begin(), find_level(), find_response()}};
    }

    return noise(NoiseKind::Unparseable, "");
}

} // namespace coe
