#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coe/strategy.hpp"

namespace coe {

struct ValidPrediction {
    EmpathyStrategy strategy{};
    std::optional<CommunicationLevel> level;
    std::string response_text;
};

enum class NoiseKind {
    NoStrategy,      // refusal / failed retrieval
    UnknownStrategy, // labeled prediction outside the taxonomy
    Unparseable,     // nothing recognizable
};

struct NoisePrediction {
    NoiseKind kind{};
    std::string label;       // offending label for UnknownStrategy
    std::string raw_excerpt; // bounded excerpt of the raw output
};

/// Structured parse of one model completion: a taxonomy-valid prediction
/// or a classified noise outcome. Never an error; failure modes are data.
struct ParsedPrediction {
    std::variant<ValidPrediction, NoisePrediction> outcome;

    bool is_valid() const { return std::holds_alternative<ValidPrediction>(outcome); }
    const ValidPrediction* valid() const { return std::get_if<ValidPrediction>(&outcome); }
    const NoisePrediction* noise() const { return std::get_if<NoisePrediction>(&outcome); }
};

/// Case-insensitive, whitespace-normalized lookup in the fixed synonym
/// table. No fuzzy matching: anything off the table is nullopt.
std::optional<EmpathyStrategy> canonicalize_strategy(std::string_view label);

/// {"no expression","none"} / {"weak"} / {"strong"}; nullopt otherwise.
std::optional<CommunicationLevel> canonicalize_level(std::string_view label);

/// Total parser over arbitrary bytes. Invalid UTF-8 is replaced with
/// U+FFFD before parsing. Tiers: labeled `Strategy:` line, then a
/// conservative declaration-pattern salvage, then noise classification.
ParsedPrediction parse_completion(const std::string& raw);

/// The parser's versioned lexicon, mirrored in data/parser_lexicon.json so
/// tests can pin it.
struct ParserLexicon {
    std::string version;
    std::vector<std::pair<std::string, EmpathyStrategy>> synonyms;
    std::vector<std::string> refusal_phrases;
    std::vector<std::string> declaration_patterns; // ECMAScript regexes, {name} = synonym alternation
};
const ParserLexicon& parser_lexicon();

/// Replaces ill-formed UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

/// At most 500 bytes of `text`, truncated on a code-point boundary.
std::string bounded_excerpt(std::string_view text);

} // namespace coe
