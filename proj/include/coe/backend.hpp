#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "coe/cache.hpp"
#include "coe/completion.hpp"

namespace coe {

/// Uniform completion interface. `tag` is caller provenance (the pair id,
/// optionally "@"-qualified by condition); the mock backend scripts on it,
/// the other backends ignore it. Implementations are safe to call from
/// many threads.
class Backend {
public:
    virtual ~Backend() = default;
    virtual RawCompletion complete(const std::string& prompt,
                                   const GenerationParams& params,
                                   const std::string& tag) = 0;
    virtual std::string_view kind() const = 0;
};

/// Fully scripted backend: tag -> completion text. Lookup tries the exact
/// tag ("pair@condition") first, then the bare pair id, then the default.
/// Throws BackendError{ScriptMiss} when nothing matches.
class MockBackend : public Backend {
public:
    explicit MockBackend(std::map<std::string, std::string> script,
                         std::optional<std::string> default_completion = std::nullopt);

    RawCompletion complete(const std::string& prompt, const GenerationParams& params,
                           const std::string& tag) override;
    std::string_view kind() const override { return "mock"; }

private:
    std::map<std::string, std::string> script_;
    std::optional<std::string> default_completion_;
};

struct LiveConfig {
    std::string base_url; // e.g. "https://api.example.com/v1"
    std::string api_key;  // empty => read from COE_API_KEY
    int max_in_flight = 4;
    int retry_max_attempts = 4;
    int retry_initial_backoff_ms = 250;
    int retry_max_backoff_ms = 4000;
    int timeout_ms = 60000;
};

/// OpenAI-compatible completions client. Transient failures (HTTP 429/5xx,
/// transport errors, timeouts) are retried with capped exponential backoff
/// up to retry_max_attempts; other HTTP errors fail immediately. In-flight
/// requests are bounded by max_in_flight.
class LiveBackend : public Backend {
public:
    explicit LiveBackend(LiveConfig config);
    ~LiveBackend() override;

    RawCompletion complete(const std::string& prompt, const GenerationParams& params,
                           const std::string& tag) override;
    std::string_view kind() const override { return "live"; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Read-through cache in front of an optional inner backend. With no inner
/// backend this is the strict replay backend: a miss throws
/// BackendError{ReplayMiss}. Fresh inner results are appended to the
/// writer (when present) before being returned, then served from memory
/// for repeated keys.
class CachedBackend : public Backend {
public:
    CachedBackend(CacheIndex index, std::shared_ptr<CacheWriter> writer,
                  std::shared_ptr<Backend> inner);

    RawCompletion complete(const std::string& prompt, const GenerationParams& params,
                           const std::string& tag) override;
    std::string_view kind() const override { return inner_ ? inner_->kind() : "replay"; }

    const CacheStats& cache_stats() const { return index_.stats(); }

private:
    CacheIndex index_;
    std::shared_ptr<CacheWriter> writer_;
    std::shared_ptr<Backend> inner_;
    std::mutex overlay_mutex_;
    std::map<std::string, RawCompletion> overlay_;
};

struct BackendConfig {
    std::string kind = "mock"; // live | replay | mock
    std::string base_url;
    std::string cache_path;
    bool strict_replay = true;
    int max_in_flight = 4;
    int retry_max_attempts = 4;
    int retry_initial_backoff_ms = 250;
    int retry_max_backoff_ms = 4000;
    int timeout_ms = 60000;
    std::string api_key; // optional override of COE_API_KEY
    std::map<std::string, std::string> mock_script;
    std::string mock_script_file; // merged into mock_script at manifest load
    std::optional<std::string> mock_default;
};

/// Builds the configured backend composition. live/mock with a cache_path
/// become read-through recorded backends; replay reads the cache only
/// (strict) or falls through to live (opt-in).
std::shared_ptr<Backend> make_backend(const BackendConfig& config);

/// UTC wall-clock in RFC 3339 ("2024-01-02T03:04:05Z").
std::string utc_now_rfc3339();

} // namespace coe
