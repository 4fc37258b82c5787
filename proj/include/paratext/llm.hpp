#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace paratext {

enum class Role { system, user, assistant };
std::string to_string(Role r);

struct Message {
    Role role = Role::user;
    std::string content;
};

enum class Mode { thinking, non_thinking };
std::string to_string(Mode m);
std::optional<Mode> mode_from_string(const std::string& s);

struct SamplingParams {
    double temperature = 0.7;
    double top_p = 0.8;
    int top_k = 20;
    double min_p = 0.0;
    int max_tokens = 2048;

    static SamplingParams defaults_for(Mode mode);
};

struct CompletionRequest {
    std::string model_id;
    std::vector<Message> messages;
    SamplingParams params;
    Mode mode = Mode::non_thinking;
};

struct CompletionResult {
    std::string final_text;
    std::optional<std::string> reasoning_trace;
    std::string raw;
    bool cached = false;
    bool unterminated_reasoning = false;
};

struct StripResult {
    std::optional<std::string> trace;
    std::string final_text;
    bool unterminated = false;
};

// Extract the first well-formed delimited reasoning block; the remainder,
// trimmed, is the final text. An unclosed open marker consumes the rest of the
// string as trace and sets `unterminated`.
StripResult strip_reasoning(std::string_view raw, std::string_view open_marker = "<think>",
                            std::string_view close_marker = "</think>");

struct GatewayError : std::runtime_error {
    enum class Kind { precondition, network, http_client, rate_limited, provider };
    Kind kind;
    GatewayError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

class ChatProvider {
  public:
    virtual ~ChatProvider() = default;
    virtual std::string name() const = 0;
    // Returns the raw assistant text; throws GatewayError on failure.
    virtual std::string complete_raw(const CompletionRequest& request) = 0;
};

class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    // One vector per input text; implementations need not normalize (the
    // gateway does). Throws GatewayError on failure.
    virtual std::vector<std::vector<double>> embed_raw(const std::vector<std::string>& texts) = 0;
};

// Content-addressed on-disk store of raw provider responses.
class ResponseCache {
  public:
    explicit ResponseCache(std::filesystem::path dir);
    static std::string request_key(const CompletionRequest& request);
    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& raw);

  private:
    std::filesystem::path path_for(const std::string& key) const;
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{200};
};

struct GatewayStats {
    std::atomic<std::uint64_t> provider_calls{0};
    std::atomic<std::uint64_t> cache_hits{0};
    std::atomic<int> in_flight{0};
    std::atomic<int> max_in_flight{0};
};

// Uniform front door: validation, caching, bounded retries, reasoning-trace
// stripping, and a concurrency bound observable through `stats()`.
class Gateway {
  public:
    Gateway(ChatProvider& provider, ResponseCache* cache = nullptr, RetryPolicy retry = {},
            int max_concurrency = 4);

    CompletionResult complete(const CompletionRequest& request);
    const GatewayStats& stats() const { return stats_; }

    std::string reasoning_open = "<think>";
    std::string reasoning_close = "</think>";

  private:
    std::string call_with_retries(const CompletionRequest& request);
    ChatProvider& provider_;
    ResponseCache* cache_;
    RetryPolicy retry_;
    int max_concurrency_;
    GatewayStats stats_;
    std::mutex slot_mutex_;
    std::condition_variable_any slot_cv_;
    int slots_used_ = 0;
};

// Unit-normalized embeddings (L2 = 1 within 1e-6); empty input list is an error.
std::vector<std::vector<double>> embed(const std::vector<std::string>& texts,
                                       EmbeddingProvider& provider);

// ---------------------------------------------------------------------------
// Deterministic mocks: pure functions of the request, no I/O. Identification
// prompts yield CJK bigrams sampled from the story at a variant/mode-dependent
// stride; explicitation prompts yield templated "gloss: description" text;
// judge prompts yield a hash-derived integer. See docs in README.
// ---------------------------------------------------------------------------

class MockChatProvider : public ChatProvider {
  public:
    std::string name() const override { return "mock-chat"; }
    std::string complete_raw(const CompletionRequest& request) override;
};

class MockEmbeddingProvider : public EmbeddingProvider {
  public:
    explicit MockEmbeddingProvider(std::size_t dim = 48) : dim_(dim) {}
    std::string name() const override { return "mock-embedding"; }
    std::vector<std::vector<double>> embed_raw(const std::vector<std::string>& texts) override;

  private:
    std::size_t dim_;
};

// Chat-completions HTTP provider (ordered-message JSON schema). Base URL,
// model id, and auth token env var come from configuration.
struct HttpProviderConfig {
    std::string base_url;        // e.g. http://host:8000/v1
    std::string model_id;
    std::string auth_env;        // name of env var holding the bearer token
    int timeout_seconds = 60;
};

class HttpChatProvider : public ChatProvider {
  public:
    explicit HttpChatProvider(HttpProviderConfig config) : config_(std::move(config)) {}
    std::string name() const override { return "http:" + config_.model_id; }
    std::string complete_raw(const CompletionRequest& request) override;

  private:
    HttpProviderConfig config_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
  public:
    explicit HttpEmbeddingProvider(HttpProviderConfig config) : config_(std::move(config)) {}
    std::string name() const override { return "http-embed:" + config_.model_id; }
    std::vector<std::vector<double>> embed_raw(const std::vector<std::string>& texts) override;

  private:
    HttpProviderConfig config_;
};

}  // namespace paratext
