#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "coe/backend.hpp"
#include "coe/error.hpp"
#include "test_util.hpp"

using namespace coe;
using namespace coe::test;
using nlohmann::json;

namespace {

BackendErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const BackendError& e) {
        return e.kind();
    }
    FAIL("expected BackendError");
    return BackendErrorKind::BadResponse;
}

/// Local OpenAI-style completions server for live-backend tests.
class TestServer {
public:
    explicit TestServer(httplib::Server::Handler handler) {
        server_.Post("/v1/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~TestServer() {
        server_.stop();
        thread_.join();
    }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

LiveConfig fast_config(const std::string& base_url) {
    LiveConfig cfg;
    cfg.base_url = base_url;
    cfg.api_key = "test-key";
    cfg.retry_initial_backoff_ms = 1;
    cfg.retry_max_backoff_ms = 4;
    cfg.timeout_ms = 5000;
    return cfg;
}

} // namespace

TEST_CASE("mock backend: scripted completions by tag") {
    MockBackend mock({{"a1:b1", "Strategy: exploration\nLevel: weak\nResponse: ok"},
                      {"a1:b1@cbt_coe", "Strategy: interpretation\nLevel: strong\nResponse: x"}},
                     std::nullopt);
    GenerationParams params;
    auto c = mock.complete("prompt", params, "a1:b1");
    CHECK(c.completion_text == "Strategy: exploration\nLevel: weak\nResponse: ok");
    CHECK(c.backend_kind == "mock");
    CHECK(c.request_key == request_key("prompt", params));

    // exact condition-qualified entry wins; other conditions fall back to the pair entry
    CHECK(mock.complete("p", params, "a1:b1@cbt_coe").completion_text ==
          "Strategy: interpretation\nLevel: strong\nResponse: x");
    CHECK(mock.complete("p", params, "a1:b1@rt_coe").completion_text ==
          "Strategy: exploration\nLevel: weak\nResponse: ok");

    CHECK(kind_of([&] { mock.complete("p", params, "unknown"); }) ==
          BackendErrorKind::ScriptMiss);

    MockBackend with_default({}, std::string("fallback"));
    CHECK(with_default.complete("p", params, "anything").completion_text == "fallback");
}

TEST_CASE("live backend: posts the documented body and parses choices[0].text") {
    json seen_body;
    std::string seen_auth;
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_body = json::parse(req.body);
        seen_auth = req.get_header_value("Authorization");
        res.set_content(json{{"choices", json::array({{{"text", "Strategy: exploration"}}})}}
                            .dump(),
                        "application/json");
    });
    LiveBackend backend(fast_config(server.base_url()));
    GenerationParams params;
    params.model_id = "test-model";
    auto c = backend.complete("the prompt", params, "");
    CHECK(c.completion_text == "Strategy: exploration");
    CHECK(c.backend_kind == "live");
    CHECK(seen_auth == "Bearer test-key");
    CHECK(seen_body["model"] == "test-model");
    CHECK(seen_body["prompt"] == "the prompt");
    CHECK(seen_body["temperature"] == doctest::Approx(0.9));
    CHECK(seen_body["top_p"] == doctest::Approx(1.0));
    CHECK(seen_body["frequency_penalty"] == doctest::Approx(0.0));
    CHECK(seen_body["presence_penalty"] == doctest::Approx(0.6));
    CHECK(seen_body["max_tokens"] == 512);
}

TEST_CASE("live backend: credential from COE_API_KEY, missing is an error") {
    unsetenv("COE_API_KEY");
    LiveConfig cfg;
    cfg.base_url = "http://127.0.0.1:1/v1";
    CHECK(kind_of([&] { LiveBackend backend(cfg); }) == BackendErrorKind::CredentialMissing);

    setenv("COE_API_KEY", "env-key", 1);
    CHECK_NOTHROW(LiveBackend{cfg});
    unsetenv("COE_API_KEY");
}

TEST_CASE("live backend: retries 429/5xx then succeeds") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        const int n = ++calls;
        if (n == 1) {
            res.status = 429;
        } else if (n == 2) {
            res.status = 503;
        } else {
            res.set_content(json{{"choices", json::array({{{"text", "ok"}}})}}.dump(),
                            "application/json");
        }
    });
    LiveBackend backend(fast_config(server.base_url()));
    auto c = backend.complete("p", GenerationParams{}, "");
    CHECK(c.completion_text == "ok");
    CHECK(calls.load() == 3);
}

TEST_CASE("live backend: non-retryable HTTP error fails immediately") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 401;
        res.set_content("denied", "text/plain");
    });
    LiveBackend backend(fast_config(server.base_url()));
    CHECK(kind_of([&] { backend.complete("p", GenerationParams{}, ""); }) ==
          BackendErrorKind::NonRetryableHttp);
    CHECK(calls.load() == 1);
}

TEST_CASE("live backend: retry budget exhaustion is distinguishable") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 500;
    });
    auto cfg = fast_config(server.base_url());
    cfg.retry_max_attempts = 3;
    LiveBackend backend(cfg);
    CHECK(kind_of([&] { backend.complete("p", GenerationParams{}, ""); }) ==
          BackendErrorKind::RetriesExhausted);
    CHECK(calls.load() == 3);
}

TEST_CASE("live backend: malformed success body is BadResponse") {
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"choices\":[]}", "application/json");
    });
    LiveBackend backend(fast_config(server.base_url()));
    CHECK(kind_of([&] { backend.complete("p", GenerationParams{}, ""); }) ==
          BackendErrorKind::BadResponse);
}

TEST_CASE("live backend: in-flight requests never exceed the configured bound") {
    std::atomic<int> current{0};
    std::atomic<int> high_water{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        const int now = ++current;
        int expected = high_water.load();
        while (now > expected && !high_water.compare_exchange_weak(expected, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(25));
        --current;
        res.set_content(json{{"choices", json::array({{{"text", "ok"}}})}}.dump(),
                        "application/json");
    });
    auto cfg = fast_config(server.base_url());
    cfg.max_in_flight = 2;
    LiveBackend backend(cfg);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] {
            backend.complete("p" + std::to_string(i), GenerationParams{}, "");
        });
    }
    for (auto& t : threads) t.join();
    CHECK(high_water.load() <= 2);
    CHECK(high_water.load() >= 1);
}

TEST_CASE("cached backend: records fresh results, replays them, strict miss errors") {
    auto dir = temp_dir("cached_backend");
    const std::string cache_path = (dir / "cache.jsonl").string();
    GenerationParams params;

    auto mock = std::make_shared<MockBackend>(
        std::map<std::string, std::string>{{"t", "scripted text"}}, std::nullopt);
    {
        CachedBackend recorded(CacheIndex::load(cache_path, true),
                               std::make_shared<CacheWriter>(cache_path), mock);
        auto first = recorded.complete("p", params, "t");
        CHECK(first.completion_text == "scripted text");
        // repeated identical request is served from the overlay, not re-appended
        auto again = recorded.complete("p", params, "t");
        CHECK(again.completion_text == "scripted text");
    }
    auto reloaded = CacheIndex::load(cache_path);
    CHECK(reloaded.size() == 1);

    // strict replay: byte-identical hit, distinguishable miss
    CachedBackend replay(CacheIndex::load(cache_path), nullptr, nullptr);
    CHECK(replay.kind() == "replay");
    auto hit = replay.complete("p", params, "t");
    CHECK(hit.completion_text == "scripted text");
    CHECK(kind_of([&] { replay.complete("other prompt", params, "t"); }) ==
          BackendErrorKind::ReplayMiss);
}

TEST_CASE("make_backend: composition per config") {
    auto dir = temp_dir("make_backend");
    BackendConfig config;
    config.kind = "mock";
    config.mock_script = {{"t", "x"}};
    auto plain = make_backend(config);
    CHECK(plain->kind() == "mock");

    config.cache_path = (dir / "cache.jsonl").string();
    auto recording = make_backend(config);
    CHECK(recording->kind() == "mock");
    recording->complete("p", GenerationParams{}, "t");

    BackendConfig replay_config;
    replay_config.kind = "replay";
    replay_config.cache_path = config.cache_path;
    auto replay = make_backend(replay_config);
    CHECK(replay->kind() == "replay");
    CHECK(replay->complete("p", GenerationParams{}, "t").completion_text == "x");

    BackendConfig bad;
    bad.kind = "weird";
    CHECK_THROWS_AS(make_backend(bad), Error);

    BackendConfig no_cache_replay;
    no_cache_replay.kind = "replay";
    CHECK_THROWS_AS(make_backend(no_cache_replay), BackendError);
}
