#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "paratext/llm.hpp"
#include "paratext/prompts.hpp"
#include "paratext/text.hpp"

using namespace paratext;
namespace fs = std::filesystem;

namespace {

CompletionRequest simple_request(const std::string& user = "hello",
                                 Mode mode = Mode::non_thinking) {
    CompletionRequest r;
    r.model_id = "m";
    r.mode = mode;
    r.params = SamplingParams::defaults_for(mode);
    r.messages = {{Role::system, "You are a test."}, {Role::user, user}};
    return r;
}

struct CountingProvider : ChatProvider {
    std::string reply = "pong";
    std::atomic<int> calls{0};
    std::string name() const override { return "counting"; }
    std::string complete_raw(const CompletionRequest&) override {
        ++calls;
        return reply;
    }
};

struct FailNTimesProvider : ChatProvider {
    int failures;
    GatewayError::Kind kind;
    std::atomic<int> calls{0};
    FailNTimesProvider(int n, GatewayError::Kind k) : failures(n), kind(k) {}
    std::string name() const override { return "flaky"; }
    std::string complete_raw(const CompletionRequest&) override {
        int c = ++calls;
        if (c <= failures) throw GatewayError(kind, "induced failure " + std::to_string(c));
        return "recovered";
    }
};

}  // namespace

TEST_CASE("sampling defaults follow the documented per-mode presets") {
    SamplingParams nt = SamplingParams::defaults_for(Mode::non_thinking);
    CHECK(nt.temperature == doctest::Approx(0.7));
    CHECK(nt.top_p == doctest::Approx(0.8));
    CHECK(nt.top_k == 20);
    CHECK(nt.min_p == doctest::Approx(0.0));
    SamplingParams th = SamplingParams::defaults_for(Mode::thinking);
    CHECK(th.temperature == doctest::Approx(0.6));
    CHECK(th.top_p == doctest::Approx(0.95));
    CHECK(th.top_k == 20);
    CHECK(th.min_p == doctest::Approx(0.0));
}

TEST_CASE("mode_from_string accepts the documented spellings") {
    CHECK(mode_from_string("thinking") == Mode::thinking);
    CHECK(mode_from_string("non-thinking") == Mode::non_thinking);
    CHECK(mode_from_string("non_thinking") == Mode::non_thinking);
    CHECK_FALSE(mode_from_string("fast").has_value());
}

TEST_CASE("strip_reasoning cases") {
    SUBCASE("well-formed block") {
        StripResult r = strip_reasoning("<think>step 1\nstep 2</think>\nThe answer.");
        REQUIRE(r.trace.has_value());
        CHECK(*r.trace == "step 1\nstep 2");
        CHECK(r.final_text == "The answer.");
        CHECK_FALSE(r.unterminated);
    }
    SUBCASE("no block at all") {
        StripResult r = strip_reasoning("Just an answer.");
        CHECK_FALSE(r.trace.has_value());
        CHECK(r.final_text == "Just an answer.");
        CHECK_FALSE(r.unterminated);
    }
    SUBCASE("unterminated block consumes the rest") {
        StripResult r = strip_reasoning("prefix <think>never closed");
        REQUIRE(r.trace.has_value());
        CHECK(*r.trace == "never closed");
        CHECK(r.final_text == "prefix");
        CHECK(r.unterminated);
    }
    SUBCASE("text on both sides of the block is kept") {
        StripResult r = strip_reasoning("before <think>t</think> after");
        CHECK(*r.trace == "t");
        CHECK(r.final_text == "before  after");
    }
    SUBCASE("only the first well-formed block is treated as reasoning") {
        StripResult r = strip_reasoning("<think>a</think>x<think>b</think>y");
        CHECK(*r.trace == "a");
        CHECK(r.final_text == "x<think>b</think>y");
    }
    SUBCASE("empty block yields an empty trace, not nullopt") {
        StripResult r = strip_reasoning("<think></think>answer");
        REQUIRE(r.trace.has_value());
        CHECK(r.trace->empty());
        CHECK(r.final_text == "answer");
    }
}

TEST_CASE("response cache: key stability and sensitivity") {
    CompletionRequest a = simple_request();
    CompletionRequest b = simple_request();
    CHECK(ResponseCache::request_key(a) == ResponseCache::request_key(b));
    CHECK(ResponseCache::request_key(a).size() == 64);  // hex SHA-256

    b.model_id = "other";
    CHECK(ResponseCache::request_key(a) != ResponseCache::request_key(b));
    b = simple_request();
    b.mode = Mode::thinking;
    CHECK(ResponseCache::request_key(a) != ResponseCache::request_key(b));
    b = simple_request();
    b.params.temperature = 0.71;
    CHECK(ResponseCache::request_key(a) != ResponseCache::request_key(b));
    b = simple_request("hello!");
    CHECK(ResponseCache::request_key(a) != ResponseCache::request_key(b));
}

TEST_CASE("response cache: disk round trip, sharded layout, persistence") {
    fs::path dir = fs::temp_directory_path() / "paratext_cache_test";
    fs::remove_all(dir);
    std::string key = ResponseCache::request_key(simple_request());
    {
        ResponseCache cache(dir);
        CHECK_FALSE(cache.get(key).has_value());
        cache.put(key, "raw é response\nwith newline");
        auto hit = cache.get(key);
        REQUIRE(hit.has_value());
        CHECK(*hit == "raw é response\nwith newline");
    }
    // two-level sharding by key prefix
    CHECK(fs::exists(dir / key.substr(0, 2) / (key + ".json")));
    // a fresh instance rereads what the first wrote
    ResponseCache cache2(dir);
    auto hit = cache2.get(key);
    REQUIRE(hit.has_value());
    CHECK(*hit == "raw é response\nwith newline");
}

TEST_CASE("gateway validates requests before any provider call") {
    CountingProvider provider;
    Gateway gateway(provider);
    auto kind_of = [&](const CompletionRequest& r) {
        try {
            gateway.complete(r);
        } catch (const GatewayError& e) {
            return e.kind;
        }
        return GatewayError::Kind::provider;  // sentinel: no throw
    };
    CompletionRequest empty;
    CHECK(kind_of(empty) == GatewayError::Kind::precondition);

    CompletionRequest blank_user = simple_request("");
    CHECK(kind_of(blank_user) == GatewayError::Kind::precondition);

    CompletionRequest assistant_first;
    assistant_first.messages = {{Role::system, "s"}, {Role::assistant, "a"}, {Role::user, "u"}};
    CHECK(kind_of(assistant_first) == GatewayError::Kind::precondition);

    CHECK(provider.calls == 0);
}

TEST_CASE("gateway caches raw responses; warm call skips the provider") {
    fs::path dir = fs::temp_directory_path() / "paratext_gwcache_test";
    fs::remove_all(dir);
    ResponseCache cache(dir);
    CountingProvider provider;
    Gateway gateway(provider, &cache);
    CompletionRequest r = simple_request();
    CompletionResult first = gateway.complete(r);
    CHECK(first.final_text == "pong");
    CHECK_FALSE(first.cached);
    CompletionResult second = gateway.complete(r);
    CHECK(second.final_text == "pong");
    CHECK(second.cached);
    CHECK(provider.calls == 1);
    CHECK(gateway.stats().cache_hits == 1);
    CHECK(gateway.stats().provider_calls == 1);
}

TEST_CASE("gateway retries transient failures with bounded attempts") {
    SUBCASE("recovers after two provider-side failures") {
        FailNTimesProvider provider(2, GatewayError::Kind::provider);
        Gateway gateway(provider, nullptr, RetryPolicy{3, std::chrono::milliseconds(1)});
        CompletionResult r = gateway.complete(simple_request());
        CHECK(r.final_text == "recovered");
        CHECK(provider.calls == 3);
        CHECK(gateway.stats().provider_calls == 3);
    }
    SUBCASE("gives up after max_attempts and rethrows the last error") {
        FailNTimesProvider provider(99, GatewayError::Kind::network);
        Gateway gateway(provider, nullptr, RetryPolicy{3, std::chrono::milliseconds(1)});
        CHECK_THROWS_AS(gateway.complete(simple_request()), GatewayError);
        CHECK(provider.calls == 3);
    }
    SUBCASE("client errors are terminal: no second attempt") {
        FailNTimesProvider provider(99, GatewayError::Kind::http_client);
        Gateway gateway(provider, nullptr, RetryPolicy{3, std::chrono::milliseconds(1)});
        CHECK_THROWS_AS(gateway.complete(simple_request()), GatewayError);
        CHECK(provider.calls == 1);
    }
    SUBCASE("rate-limited requests retry (with a longer delay)") {
        FailNTimesProvider provider(1, GatewayError::Kind::rate_limited);
        Gateway gateway(provider, nullptr, RetryPolicy{3, std::chrono::milliseconds(1)});
        CompletionResult r = gateway.complete(simple_request());
        CHECK(r.final_text == "recovered");
        CHECK(provider.calls == 2);
    }
}

TEST_CASE("gateway bounds in-flight provider calls") {
    struct SlowProvider : ChatProvider {
        std::string name() const override { return "slow"; }
        std::string complete_raw(const CompletionRequest&) override {
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            return "ok";
        }
    } provider;
    Gateway gateway(provider, nullptr, RetryPolicy{}, 3);
    std::vector<std::thread> threads;
    threads.reserve(12);
    for (int i = 0; i < 12; ++i)
        threads.emplace_back([&, i] {
            gateway.complete(simple_request("q" + std::to_string(i)));
        });
    for (auto& t : threads) t.join();
    CHECK(gateway.stats().max_in_flight.load() <= 3);
    CHECK(gateway.stats().max_in_flight.load() >= 1);
    CHECK(gateway.stats().in_flight.load() == 0);
    CHECK(gateway.stats().provider_calls == 12);
}

TEST_CASE("thinking mode strips the reasoning block; non-thinking trims") {
    struct ThinkProvider : ChatProvider {
        std::string name() const override { return "think"; }
        std::string complete_raw(const CompletionRequest&) override {
            return "<think>chain of thought</think>\n  final answer  ";
        }
    } provider;
    Gateway gateway(provider);
    CompletionRequest thinking = simple_request("q", Mode::thinking);
    CompletionResult r = gateway.complete(thinking);
    REQUIRE(r.reasoning_trace.has_value());
    CHECK(*r.reasoning_trace == "chain of thought");
    CHECK(r.final_text == "final answer");

    CompletionRequest plain = simple_request("q", Mode::non_thinking);
    CompletionResult r2 = gateway.complete(plain);
    CHECK(r2.final_text == "<think>chain of thought</think>\n  final answer");
    CHECK_FALSE(r2.reasoning_trace.has_value());
}

TEST_CASE("embed normalizes to unit L2 and validates shapes") {
    MockEmbeddingProvider provider;
    auto vecs = embed({"江湖", "the pond"}, provider);
    REQUIRE(vecs.size() == 2);
    for (const auto& v : vecs) {
        REQUIRE(v.size() == 48);
        double norm = 0.0;
        for (double x : v) norm += x * x;
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
    }
    // deterministic across calls
    auto again = embed({"江湖", "the pond"}, provider);
    CHECK(vecs == again);
    CHECK_THROWS_AS(embed({}, provider), GatewayError);

    struct ZeroProvider : EmbeddingProvider {
        std::string name() const override { return "zero"; }
        std::vector<std::vector<double>> embed_raw(
            const std::vector<std::string>& texts) override {
            return std::vector<std::vector<double>>(texts.size(), std::vector<double>(4, 0.0));
        }
    } zero;
    CHECK_THROWS_AS(embed({"x"}, zero), GatewayError);

    struct ShortProvider : EmbeddingProvider {
        std::string name() const override { return "short"; }
        std::vector<std::vector<double>> embed_raw(const std::vector<std::string>&) override {
            return {};  // wrong count
        }
    } shorty;
    CHECK_THROWS_AS(embed({"x"}, shorty), GatewayError);
}

// ---------------------------------------------------------------------------
// Deterministic mock chat provider
// ---------------------------------------------------------------------------

TEST_CASE("mock chat: identification requests yield a deterministic CJK term list") {
    MockChatProvider provider;
    Gateway gateway(provider);
    CompletionRequest r;
    r.model_id = "generator";
    r.mode = Mode::non_thinking;
    r.params = SamplingParams::defaults_for(r.mode);
    r.messages = prompts::identification_prompt(
        Story{"s1", "t", "世稱江湖，蓋幽冥之事也。又言泮宮之禮，天地神明。"},
        PromptVariant::default_);
    std::string a = gateway.complete(r).final_text;
    std::string b = gateway.complete(r).final_text;
    CHECK(a == b);  // pure function of the request
    CHECK(a.find(',') != std::string::npos);
    // the leading term is a two-codepoint CJK bigram
    std::string first_term = a.substr(0, a.find(','));
    auto cps = text::decode_utf8(first_term);
    REQUIRE(cps.size() == 2);
    CHECK(text::is_cjk(cps[0]));
    CHECK(text::is_cjk(cps[1]));

    // a different prompt variant shifts the sampling stride
    CompletionRequest rv = r;
    rv.messages = prompts::identification_prompt(
        Story{"s1", "t", "世稱江湖，蓋幽冥之事也。又言泮宮之禮，天地神明。"},
        PromptVariant::theoretical);
    CHECK(gateway.complete(rv).final_text != a);
}

TEST_CASE("mock chat: explicitation requests yield 'term: description' text") {
    MockChatProvider provider;
    Gateway gateway(provider);
    CompletionRequest r;
    r.model_id = "generator";
    r.mode = Mode::non_thinking;
    r.params = SamplingParams::defaults_for(r.mode);
    r.messages = prompts::explicitation_prompt(
        "江湖", Story{"s1", "t", "世稱江湖，蓋幽冥之事也。"}, PromptVariant::default_,
        std::nullopt);
    std::string text1 = gateway.complete(r).final_text;
    CHECK(text1.find(": ") != std::string::npos);
    CHECK(gateway.complete(r).final_text == text1);
}

TEST_CASE("mock chat: thinking mode wraps a reasoning block the gateway strips") {
    MockChatProvider provider;
    Gateway gateway(provider);
    CompletionRequest r;
    r.model_id = "generator";
    r.mode = Mode::thinking;
    r.params = SamplingParams::defaults_for(r.mode);
    r.messages = prompts::explicitation_prompt(
        "江湖", Story{"s1", "t", "世稱江湖，蓋幽冥之事也。"}, PromptVariant::default_,
        std::nullopt);
    CHECK(provider.complete_raw(r).rfind("<think>", 0) == 0);
    CompletionResult res = gateway.complete(r);
    CHECK(res.reasoning_trace.has_value());
    CHECK(res.final_text.find("<think>") == std::string::npos);
}

TEST_CASE("mock chat: judge requests return a bare integer in [0, 100]") {
    MockChatProvider provider;
    Gateway gateway(provider);
    CompletionRequest r;
    r.model_id = "judge";
    r.mode = Mode::non_thinking;
    r.params = SamplingParams::defaults_for(r.mode);
    r.messages = prompts::judge_prompt("江湖", "a candidate", {"a reference"});
    std::string reply = gateway.complete(r).final_text;
    int value = std::stoi(reply);
    CHECK(value >= 0);
    CHECK(value <= 100);
    CHECK(std::to_string(value) == reply);
}

// ---------------------------------------------------------------------------
// HTTP providers against a loopback server
// ---------------------------------------------------------------------------

namespace {

struct LoopbackServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    LoopbackServer() {
        server.Post("/v1/chat/completions",
                    [](const httplib::Request& req, httplib::Response& res) {
                        auto body = nlohmann::json::parse(req.body);
                        std::string model = body.value("model", "");
                        if (model == "rl") {
                            res.status = 429;
                            return;
                        }
                        if (model == "boom") {
                            res.status = 500;
                            return;
                        }
                        if (model == "nf") {
                            res.status = 404;
                            return;
                        }
                        nlohmann::json msg = {{"role", "assistant"},
                                              {"content", "served: " + model}};
                        if (model == "think") {
                            msg["reasoning_content"] = "serverside reasoning";
                            msg["content"] = "final only";
                        }
                        if (model == "auth") {
                            msg["content"] = req.get_header_value("Authorization");
                        }
                        nlohmann::json out = {
                            {"choices", nlohmann::json::array({{{"message", msg}}})}};
                        res.set_content(out.dump(), "application/json");
                    });
        server.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
            auto body = nlohmann::json::parse(req.body);
            nlohmann::json data = nlohmann::json::array();
            for (std::size_t i = 0; i < body["input"].size(); ++i)
                data.push_back({{"embedding", {1.0, 2.0, static_cast<double>(i)}}});
            res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LoopbackServer() {
        server.stop();
        thread.join();
    }
    std::string base() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

GatewayError::Kind call_kind(HttpChatProvider& provider, const std::string& model) {
    CompletionRequest r = simple_request();
    r.model_id = model;
    try {
        provider.complete_raw(r);
    } catch (const GatewayError& e) {
        return e.kind;
    }
    return GatewayError::Kind::precondition;  // sentinel: no throw
}

}  // namespace

TEST_CASE("http chat provider: success, error classification, reasoning rewrap") {
    LoopbackServer loop;
    HttpChatProvider provider({loop.base(), "fallback-model", "", 5});

    CompletionRequest ok = simple_request();
    ok.model_id = "ok";
    CHECK(provider.complete_raw(ok) == "served: ok");

    // wire-level reasoning_content is rewrapped into the delimited form
    CompletionRequest think = simple_request("q", Mode::thinking);
    think.model_id = "think";
    std::string raw = provider.complete_raw(think);
    CHECK(raw == "<think>serverside reasoning</think>\nfinal only");

    CHECK(call_kind(provider, "rl") == GatewayError::Kind::rate_limited);
    CHECK(call_kind(provider, "boom") == GatewayError::Kind::provider);
    CHECK(call_kind(provider, "nf") == GatewayError::Kind::http_client);

    HttpChatProvider dead({"http://127.0.0.1:1/v1", "m", "", 1});
    CHECK(call_kind(dead, "any") == GatewayError::Kind::network);
}

TEST_CASE("http chat provider: bearer token from the configured env var") {
    LoopbackServer loop;
    setenv("PARATEXT_TEST_TOKEN", "sekret", 1);
    HttpChatProvider provider({loop.base(), "m", "PARATEXT_TEST_TOKEN", 5});
    CompletionRequest r = simple_request();
    r.model_id = "auth";
    CHECK(provider.complete_raw(r) == "Bearer sekret");
    unsetenv("PARATEXT_TEST_TOKEN");
    CHECK_THROWS_AS(provider.complete_raw(r), GatewayError);  // precondition: env var unset
}

TEST_CASE("http embedding provider parses the data array") {
    LoopbackServer loop;
    HttpEmbeddingProvider provider({loop.base(), "emb", "", 5});
    auto vecs = provider.embed_raw({"a", "b"});
    REQUIRE(vecs.size() == 2);
    CHECK(vecs[0] == std::vector<double>{1.0, 2.0, 0.0});
    CHECK(vecs[1] == std::vector<double>{1.0, 2.0, 1.0});
}
