#include "doctest.h"

#include <set>
#include <thread>

#include "json.hpp"

#include "classeval/backends.hpp"
#include "classeval/llmclient.hpp"
#include "fixtures.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines _res.
#include "httplib.h"

using namespace classeval;
using nlohmann::json;

namespace {

ChatRequest req(const std::string& text, double temperature = 0.0) {
    return {"m", {{Role::System, "sys"}, {Role::Human, text}}, temperature, 64};
}

/// Fails with the given errors in order, then echoes the last message.
class FlakyBackend final : public ChatBackend {
public:
    explicit FlakyBackend(std::vector<std::function<void()>> failures) : failures_(std::move(failures)) {}
    ChatResponse send(const ChatRequest& r) override {
        if (calls_++ < failures_.size()) failures_[calls_ - 1]();
        ChatResponse out;
        out.text = r.messages.back().content;
        return out;
    }
    std::size_t calls() const { return calls_; }

private:
    std::vector<std::function<void()>> failures_;
    std::size_t calls_ = 0;
};

}  // namespace

TEST_CASE("cache keys") {
    CHECK(cache_key(req("a")) == cache_key(req("a")));
    CHECK(cache_key(req("a")).size() == 64);
    CHECK(cache_key(req("a")) != cache_key(req("b")));
    CHECK(cache_key(req("a")) != cache_key(req("a", 0.7)));
    auto other_model = req("a");
    other_model.model = "n";
    CHECK(cache_key(req("a")) != cache_key(other_model));
    auto role_swap = req("a");
    role_swap.messages[0].role = Role::Human;
    CHECK(cache_key(req("a")) != cache_key(role_swap));

    const auto canon = canonical_request(req("rāmaḥ"));
    CHECK(canon.find("rāmaḥ") != std::string::npos);
    CHECK(canon.find(' ') == std::string::npos);
    CHECK(canon.find("\"max_tokens\"") < canon.find("\"messages\""));
    CHECK(request_from_json(request_to_json(req("x", 0.3))) == req("x", 0.3));
}

TEST_CASE("cache keys do not collide across message boundaries") {
    std::set<std::string> keys;
    const std::vector<std::string> parts = {"", "a", "b", "ab", "a\"", "\"b", "a,b", "a\n"};
    for (const auto& x : parts)
        for (const auto& y : parts) {
            ChatRequest r{"m", {{Role::System, x}, {Role::Human, y}}, 0.0, 64};
            keys.insert(cache_key(r));
        }
    CHECK(keys.size() == parts.size() * parts.size());
}

TEST_CASE("client caches responses on disk") {
    fixtures::TempDir dir("client-cache");
    auto mock = std::make_shared<MockChatBackend>();
    mock->push("first");
    ClientOptions opts;
    opts.cache_dir = dir.path();
    ChatClient client(mock, opts);

    const auto a = client.complete(req("q"));
    CHECK(a.text == "first");
    CHECK_FALSE(a.from_cache);
    const auto b = client.complete(req("q"));
    CHECK(b.text == "first");
    CHECK(b.from_cache);
    CHECK(mock->calls() == 1);
    CHECK(client.stats().cache_hits == 1);
    CHECK(std::filesystem::exists(dir / (cache_key(req("q")) + ".json")));

    ClientOptions replay = opts;
    replay.mode = ClientMode::ReplayOnly;
    ChatClient replayer(nullptr, replay);
    CHECK(replayer.complete(req("q")).text == "first");
    CHECK_THROWS_AS(replayer.complete(req("other")), CacheMiss);
    CHECK_THROWS_AS(client.complete({"m", {}, 0.0, 64}), std::invalid_argument);
}

TEST_CASE("replay-only with an empty cache") {
    fixtures::TempDir dir("client-empty");
    ClientOptions opts;
    opts.cache_dir = dir.path();
    opts.mode = ClientMode::ReplayOnly;
    ChatClient client(nullptr, opts);
    CHECK_THROWS_AS(client.complete(req("q")), CacheMiss);
}

TEST_CASE("retries with exponential backoff") {
    std::vector<std::chrono::milliseconds> waits;
    ClientOptions opts;
    opts.base_backoff = std::chrono::milliseconds(10);
    opts.max_retries = 3;
    opts.sleep = [&](std::chrono::milliseconds d) { waits.push_back(d); };

    SUBCASE("transient failures then success") {
        auto backend = std::make_shared<FlakyBackend>(std::vector<std::function<void()>>{
            [] { throw TransportError("reset"); }, [] { throw RateLimited("429"); },
            [] { throw ProviderError(503, "busy"); }});
        ChatClient client(backend, opts);
        CHECK(client.complete(req("q")).text == "q");
        CHECK(backend->calls() == 4);
        CHECK(waits == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(10), std::chrono::milliseconds(20),
                                                             std::chrono::milliseconds(40)});
        CHECK(client.stats().retries == 3);
    }
    SUBCASE("client errors are not retried") {
        auto backend = std::make_shared<FlakyBackend>(
            std::vector<std::function<void()>>{[] { throw ProviderError(400, "bad request"); }});
        ChatClient client(backend, opts);
        CHECK_THROWS_AS(client.complete(req("q")), ProviderError);
        CHECK(backend->calls() == 1);
    }
    SUBCASE("retries run out") {
        std::vector<std::function<void()>> fails(10, [] { throw TransportError("down"); });
        auto backend = std::make_shared<FlakyBackend>(fails);
        ChatClient client(backend, opts);
        CHECK_THROWS_AS(client.complete(req("q")), TransportError);
        CHECK(backend->calls() == 4);
    }
}

TEST_CASE("token bucket") {
    const auto t0 = TokenBucket::Clock::now();
    TokenBucket bucket(60, t0);
    for (int i = 0; i < 60; ++i) CHECK_FALSE(bucket.try_acquire(t0).has_value());
    const auto wait = bucket.try_acquire(t0);
    REQUIRE(wait.has_value());
    CHECK(std::chrono::duration<double>(*wait).count() == doctest::Approx(1.0).epsilon(0.01));
    CHECK_FALSE(bucket.try_acquire(t0 + std::chrono::seconds(1)).has_value());

    TokenBucket unlimited(0, t0);
    for (int i = 0; i < 1000; ++i) CHECK_FALSE(unlimited.try_acquire(t0).has_value());
}

TEST_CASE("mock backend resolution order") {
    const json script = {{"queue", {"one", "two"}},
                         {"rules", {{{"contains", "special"}, {"respond", "ruled"}},
                                    {{"contains", "special case"}, {"respond", "longer rule"}}}},
                         {"default", "fallback"}};
    auto mock = MockChatBackend::from_json(script);
    CHECK(mock->send(req("a special case")).text == "longer rule");
    CHECK(mock->send(req("special")).text == "ruled");
    CHECK(mock->send(req("x")).text == "one");
    CHECK(mock->send(req("y")).text == "two");
    CHECK(mock->send(req("z")).text == "fallback");
    const auto trace = mock->trace();
    REQUIRE(trace.size() == 5);
    CHECK(trace[0].source == "rule");
    CHECK(trace[2].source == "queue");
    CHECK(trace[2].request == req("x"));
    CHECK(trace[4].source == "default");

    MockChatBackend empty;
    try {
        empty.send(req("x"));
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.status() == 404);
    }
}

TEST_CASE("mock answer echo reads only the marked section") {
    MockChatBackend mock;
    mock.set_answer_echo({{{"", "rāmaḥ"}, {"who", "sītā"}}, {{"contexts:", "question:"}}});
    mock.set_default("none");
    CHECK(mock.send(req("contexts: 1. rāmaḥ vanaṃ gacchati\nquestion: kaḥ")).text == "rāmaḥ");
    CHECK(mock.send(req("contexts: nothing\nquestion: rāmaḥ")).text == "none");
    CHECK(mock.send(req("contexts: sītā\nquestion: who")).text == "sītā");
    CHECK(mock.send(req("contexts: sītā\nquestion: what")).text == "none");
}

TEST_CASE("http wire format") {
    const auto body = json::parse(HttpChatBackend::request_body(req("rāmaḥ", 0.5)));
    CHECK(body["model"] == "m");
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["messages"][1]["content"] == "rāmaḥ");
    CHECK(body["temperature"] == 0.5);
    CHECK(body["max_tokens"] == 64);

    const auto r = HttpChatBackend::parse_response(
        R"({"id":"x1","model":"m","choices":[{"message":{"role":"assistant","content":"ok"},"finish_reason":"stop"}],"usage":{"prompt_tokens":3,"completion_tokens":1}})");
    CHECK(r.text == "ok");
    CHECK(r.finish_reason == "stop");
    CHECK(r.usage.prompt_tokens == 3);
    CHECK(r.provider_metadata["id"] == "x1");
    CHECK_THROWS_AS(HttpChatBackend::parse_response("{}"), ProviderError);
    CHECK_THROWS_AS(HttpChatBackend::parse_response("not json"), ProviderError);
}

TEST_CASE("http backend against a local server") {
    httplib::Server server;
    std::string seen_auth;
    server.Post("/v1/chat/completions", [&](const httplib::Request& rq, httplib::Response& rs) {
        seen_auth = rq.get_header_value("Authorization");
        const auto body = json::parse(rq.body);
        const std::string text = body["messages"].back()["content"];
        if (text == "limit") {
            rs.status = 429;
            rs.set_content("slow down", "text/plain");
            return;
        }
        if (text == "boom") {
            rs.status = 500;
            rs.set_content("oops", "text/plain");
            return;
        }
        const json out = {{"choices", {{{"message", {{"content", "echo:" + text}}}, {"finish_reason", "stop"}}}}};
        rs.set_content(out.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("CLASSEVAL_TEST_KEY", "sekret", 1);
    HttpOptions opts;
    opts.base_url = "http://127.0.0.1:" + std::to_string(port);
    opts.api_key_env = "CLASSEVAL_TEST_KEY";
    opts.timeout = std::chrono::seconds(5);
    HttpChatBackend backend(opts);
    CHECK(backend.send(req("hi")).text == "echo:hi");
    CHECK(seen_auth == "Bearer sekret");
    CHECK_THROWS_AS(backend.send(req("limit")), RateLimited);
    try {
        backend.send(req("boom"));
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.status() == 500);
    }
    server.stop();
    th.join();

    HttpChatBackend dead(opts);
    CHECK_THROWS_AS(dead.send(req("hi")), TransportError);
}
