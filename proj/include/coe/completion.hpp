#pragma once

#include <cstdint>
#include <string>

namespace coe {

/// Decoding parameters sent to the completion endpoint. Defaults are the
/// experiment's reference values.
struct GenerationParams {
    std::string model_id = "text-davinci-003";
    double temperature = 0.9;
    double top_p = 1.0;
    double frequency_penalty = 0.0;
    double presence_penalty = 0.6;
    int max_tokens = 512;

    /// Throws Error when a field is out of range
    /// (0 <= temperature <= 2, 0 < top_p <= 1, max_tokens > 0).
    void validate() const;

    bool operator==(const GenerationParams&) const = default;
};

/// One backend response with full request provenance.
struct RawCompletion {
    std::string request_key; // 64 hex chars, see request_key()
    std::string prompt;
    GenerationParams params;
    std::string completion_text; // may legitimately be empty
    std::string backend_kind;    // "live", "replay" or "mock"
    std::int64_t latency_ms = 0;
    std::string created_at; // UTC, RFC 3339
};

/// Canonical serialization of (prompt, params) used for hashing: UTF-8
/// JSON with alphabetically sorted keys, reals formatted "%.6f", strings
/// JSON-escaped. Stable across runs and platforms.
std::string canonical_request_json(const std::string& prompt, const GenerationParams& params);

/// SHA-256 of canonical_request_json, as 64 hex chars.
std::string request_key(const std::string& prompt, const GenerationParams& params);

} // namespace coe
