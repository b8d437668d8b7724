#ifndef CLASSEVAL_LLMCLIENT_HPP
#define CLASSEVAL_LLMCLIENT_HPP

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "json.hpp"

#include "classeval/error.hpp"

namespace classeval {

enum class Role { System, Human };

std::string_view to_string(Role role) noexcept;
Role parse_role(std::string_view name);

struct ChatMessage {
    Role role = Role::Human;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

inline constexpr double kDefaultTemperature = 0.0;
inline constexpr int kDefaultMaxTokens = 1024;

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = kDefaultTemperature;
    int max_tokens = kDefaultMaxTokens;

    bool operator==(const ChatRequest&) const = default;
};

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct ChatResponse {
    std::string text;  // verbatim provider output
    std::string finish_reason;
    Usage usage;
    nlohmann::json provider_metadata = nlohmann::json::object();
    bool from_cache = false;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class RateLimited : public Error {
public:
    using Error::Error;
};

class CacheMiss : public Error {
public:
    explicit CacheMiss(const std::string& key) : Error("no cached response for request " + key) {}
};

class ProviderError : public Error {
public:
    ProviderError(int status, std::string body_excerpt)
        : Error("provider returned HTTP " + std::to_string(status) + ": " + body_excerpt),
          status_(status),
          body_(std::move(body_excerpt)) {}
    int status() const noexcept { return status_; }
    const std::string& body_excerpt() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

/// Canonical serialization of the fields that identify a request: compact
/// JSON, keys sorted, UTF-8 unescaped.
std::string canonical_request(const ChatRequest& request);
nlohmann::json request_to_json(const ChatRequest& request);
ChatRequest request_from_json(const nlohmann::json& j);

/// SHA-256 of the canonical serialization.
std::string cache_key(const ChatRequest& request);

/// One provider call, no caching or retries.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    /// Throws TransportError, RateLimited or ProviderError.
    virtual ChatResponse send(const ChatRequest& request) = 0;
};

/// Token bucket: `per_minute` requests per minute with a burst of the same size.
/// Zero means unlimited.
class TokenBucket {
public:
    using Clock = std::chrono::steady_clock;

    explicit TokenBucket(double per_minute, Clock::time_point start = Clock::now());

    /// Takes a token if one is available at `now`; otherwise returns the wait.
    std::optional<Clock::duration> try_acquire(Clock::time_point now);
    /// Blocks until a token is available.
    void acquire();

private:
    double capacity_;
    double tokens_;
    double per_second_;
    Clock::time_point last_;
    std::mutex mutex_;
};

enum class ClientMode { Live, ReplayOnly };

struct ClientOptions {
    ClientMode mode = ClientMode::Live;
    std::optional<std::filesystem::path> cache_dir;
    int max_retries = 3;
    std::chrono::milliseconds base_backoff{500};
    double requests_per_minute = 0.0;
    std::size_t max_in_flight = 4;
    /// Used for backoff waits; replaced in tests.
    std::function<void(std::chrono::milliseconds)> sleep;
};

struct ClientStats {
    std::uint64_t requests = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t backend_calls = 0;
    std::uint64_t retries = 0;
};

/// Cache-first chat completion.
///
/// Each response is stored as `<cache_dir>/<key>.json` holding the canonical
/// request, the verbatim response and a timestamp. On a miss the backend is
/// called with exponential backoff on transport errors, HTTP 429 and 5xx;
/// ReplayOnly mode throws CacheMiss instead. Writes to one key are serialized.
class ChatClient {
public:
    ChatClient(std::shared_ptr<ChatBackend> backend, ClientOptions options);

    ChatResponse complete(const ChatRequest& request);

    ClientStats stats() const;
    const ClientOptions& options() const noexcept { return options_; }

private:
    std::optional<ChatResponse> read_cache(const std::filesystem::path& file) const;
    void write_cache(const std::filesystem::path& file, const ChatRequest& request,
                     const ChatResponse& response) const;
    ChatResponse call_with_retries(const ChatRequest& request);

    std::shared_ptr<ChatBackend> backend_;
    ClientOptions options_;
    TokenBucket bucket_;
    std::counting_semaphore<1024> in_flight_;
    std::array<std::mutex, 64> key_locks_;
    std::atomic<std::uint64_t> requests_{0};
    std::atomic<std::uint64_t> cache_hits_{0};
    std::atomic<std::uint64_t> backend_calls_{0};
    std::atomic<std::uint64_t> retries_{0};
};

}  // namespace classeval

#endif  // CLASSEVAL_LLMCLIENT_HPP
