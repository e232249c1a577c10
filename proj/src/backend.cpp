#include "coe/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "coe/error.hpp"

namespace coe {

using nlohmann::json;

std::string utc_now_rfc3339() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// MockBackend

MockBackend::MockBackend(std::map<std::string, std::string> script,
                         std::optional<std::string> default_completion)
    : script_(std::move(script)), default_completion_(std::move(default_completion)) {}

RawCompletion MockBackend::complete(const std::string& prompt, const GenerationParams& params,
                                    const std::string& tag) {
    const std::string* text = nullptr;
    if (auto it = script_.find(tag); it != script_.end()) {
        text = &it->second;
    } else if (auto at = tag.find('@'); at != std::string::npos) {
        if (auto it2 = script_.find(tag.substr(0, at)); it2 != script_.end()) {
            text = &it2->second;
        }
    }
    if (!text && default_completion_) text = &*default_completion_;
    if (!text) {
        throw BackendError(BackendErrorKind::ScriptMiss,
                           "mock backend: no scripted completion for tag '" + tag + "'");
    }
    RawCompletion c;
    c.prompt = prompt;
    c.params = params;
    c.request_key = request_key(prompt, params);
    c.completion_text = *text;
    c.backend_kind = "mock";
    c.latency_ms = 0;
    c.created_at = utc_now_rfc3339();
    return c;
}

// ---------------------------------------------------------------------------
// LiveBackend

namespace {

struct ParsedUrl {
    std::string host_part;   // scheme://host[:port]
    std::string path_prefix; // "" or "/v1"
};

ParsedUrl parse_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw BackendError(BackendErrorKind::NonRetryableHttp,
                           "base_url must start with http:// or https://: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    ParsedUrl parsed;
    if (path_start == std::string::npos) {
        parsed.host_part = base_url;
    } else {
        parsed.host_part = base_url.substr(0, path_start);
        parsed.path_prefix = base_url.substr(path_start);
    }
    while (!parsed.path_prefix.empty() && parsed.path_prefix.back() == '/') {
        parsed.path_prefix.pop_back();
    }
    return parsed;
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

} // namespace

struct LiveBackend::Impl {
    LiveConfig config;
    ParsedUrl url;
    std::string api_key;
    std::counting_semaphore<> in_flight;

    Impl(LiveConfig cfg, ParsedUrl parsed, std::string key)
        : config(std::move(cfg)), url(std::move(parsed)), api_key(std::move(key)),
          in_flight(std::max(1, config.max_in_flight)) {}

    httplib::Client make_client() const {
        httplib::Client client(url.host_part);
        client.set_connection_timeout(std::chrono::milliseconds(config.timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(config.timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(config.timeout_ms));
        return client;
    }
};

LiveBackend::LiveBackend(LiveConfig config) {
    if (config.base_url.empty()) {
        throw BackendError(BackendErrorKind::NonRetryableHttp, "live backend: base_url not set");
    }
    std::string key = config.api_key;
    if (key.empty()) {
        const char* env = std::getenv("COE_API_KEY");
        if (env) key = env;
    }
    if (key.empty()) {
        throw BackendError(BackendErrorKind::CredentialMissing,
                           "live backend: COE_API_KEY is not set");
    }
    ParsedUrl parsed = parse_base_url(config.base_url);
    impl_ = std::make_unique<Impl>(std::move(config), std::move(parsed), std::move(key));
}

LiveBackend::~LiveBackend() = default;

RawCompletion LiveBackend::complete(const std::string& prompt, const GenerationParams& params,
                                    const std::string& /*tag*/) {
    params.validate();

    const json body{{"model", params.model_id},
                    {"prompt", prompt},
                    {"temperature", params.temperature},
                    {"top_p", params.top_p},
                    {"frequency_penalty", params.frequency_penalty},
                    {"presence_penalty", params.presence_penalty},
                    {"max_tokens", params.max_tokens}};
    const std::string payload = body.dump();
    const httplib::Headers headers = {{"Authorization", "Bearer " + impl_->api_key}};
    const std::string path = impl_->url.path_prefix + "/completions";

    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
    } release{impl_->in_flight};

    const auto start = std::chrono::steady_clock::now();
    std::string last_error;
    const int attempts = std::max(1, impl_->config.retry_max_attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        auto client = impl_->make_client();
        auto res = client.Post(path, headers, payload, "application/json");
        if (res && res->status == 200) {
            std::string text;
            try {
                json parsed = json::parse(res->body);
                text = parsed.at("choices").at(0).at("text").get<std::string>();
            } catch (const json::exception& e) {
                throw BackendError(BackendErrorKind::BadResponse,
                                   std::string("completions response missing choices[0].text: ") +
                                       e.what());
            }
            RawCompletion c;
            c.prompt = prompt;
            c.params = params;
            c.request_key = request_key(prompt, params);
            c.completion_text = std::move(text);
            c.backend_kind = "live";
            c.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();
            c.created_at = utc_now_rfc3339();
            return c;
        }
        if (res && !retryable_status(res->status)) {
            throw BackendError(BackendErrorKind::NonRetryableHttp,
                               "completions request failed with HTTP " +
                                   std::to_string(res->status) + ": " +
                                   res->body.substr(0, 200));
        }
        last_error = res ? "HTTP " + std::to_string(res->status)
                         : "transport error: " + httplib::to_string(res.error());
        if (attempt < attempts) {
            std::int64_t backoff = impl_->config.retry_initial_backoff_ms;
            for (int k = 1; k < attempt; ++k) backoff *= 2;
            backoff = std::min<std::int64_t>(backoff, impl_->config.retry_max_backoff_ms);
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        }
    }
    throw BackendError(BackendErrorKind::RetriesExhausted,
                       "completions request failed after " + std::to_string(attempts) +
                           " attempts; last error: " + last_error);
}

// ---------------------------------------------------------------------------
// CachedBackend

CachedBackend::CachedBackend(CacheIndex index, std::shared_ptr<CacheWriter> writer,
                             std::shared_ptr<Backend> inner)
    : index_(std::move(index)), writer_(std::move(writer)), inner_(std::move(inner)) {}

RawCompletion CachedBackend::complete(const std::string& prompt, const GenerationParams& params,
                                      const std::string& tag) {
    const std::string key = request_key(prompt, params);
    if (auto hit = index_.lookup(key)) return *hit;
    {
        std::lock_guard<std::mutex> lock(overlay_mutex_);
        if (auto it = overlay_.find(key); it != overlay_.end()) return it->second;
    }
    if (!inner_) {
        throw BackendError(BackendErrorKind::ReplayMiss,
                           "strict replay: no cached completion for key " + key +
                               " (tag '" + tag + "')");
    }
    RawCompletion fresh = inner_->complete(prompt, params, tag);
    if (writer_) writer_->append(fresh); // persist before handing out
    {
        std::lock_guard<std::mutex> lock(overlay_mutex_);
        overlay_.emplace(key, fresh);
    }
    return fresh;
}

// ---------------------------------------------------------------------------
// Composition

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
    auto live = [&]() -> std::shared_ptr<Backend> {
        LiveConfig live_config;
        live_config.base_url = config.base_url;
        live_config.api_key = config.api_key;
        live_config.max_in_flight = config.max_in_flight;
        live_config.retry_max_attempts = config.retry_max_attempts;
        live_config.retry_initial_backoff_ms = config.retry_initial_backoff_ms;
        live_config.retry_max_backoff_ms = config.retry_max_backoff_ms;
        live_config.timeout_ms = config.timeout_ms;
        return std::make_shared<LiveBackend>(std::move(live_config));
    };

    if (config.kind == "mock" || config.kind == "live") {
        std::shared_ptr<Backend> inner =
            config.kind == "mock"
                ? std::make_shared<MockBackend>(config.mock_script, config.mock_default)
                : live();
        if (config.cache_path.empty()) return inner;
        auto index = CacheIndex::load(config.cache_path, /*allow_missing=*/true);
        auto writer = std::make_shared<CacheWriter>(config.cache_path);
        return std::make_shared<CachedBackend>(std::move(index), std::move(writer), inner);
    }
    if (config.kind == "replay") {
        if (config.cache_path.empty()) {
            throw BackendError(BackendErrorKind::ReplayMiss,
                               "replay backend requires a cache_path");
        }
        auto index = CacheIndex::load(config.cache_path, /*allow_missing=*/false);
        if (config.strict_replay) {
            return std::make_shared<CachedBackend>(std::move(index), nullptr, nullptr);
        }
        auto writer = std::make_shared<CacheWriter>(config.cache_path);
        return std::make_shared<CachedBackend>(std::move(index), std::move(writer), live());
    }
    throw Error("unknown backend kind '" + config.kind + "' (expected live, replay or mock)");
}

} // namespace coe
