#ifndef CLASSEVAL_BACKENDS_HPP
#define CLASSEVAL_BACKENDS_HPP

#include <chrono>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "classeval/llmclient.hpp"

namespace classeval {

struct HttpOptions {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::seconds timeout{120};
};

/// OpenAI-compatible chat-completion endpoint (see docs/wire_format.md).
/// The bearer token is read from `api_key_env` at construction; an unset
/// variable sends no Authorization header.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(HttpOptions options);

    ChatResponse send(const ChatRequest& request) override;

    static std::string request_body(const ChatRequest& request);
    /// Throws ProviderError(200, ...) when the body lacks a message content.
    static ChatResponse parse_response(const std::string& body);

private:
    HttpOptions options_;
    std::string api_key_;
};

/// Scripted backend for tests and offline runs. Resolution order per request:
/// the longest `rules` key contained in the last human message, then
/// `answer_echo`, then the queue, then `default`; if nothing applies the call
/// fails with ProviderError(404).
///
/// Script (JSON):
///   { "queue": ["...", ...],
///     "rules": [{"contains": "...", "respond": "..."}, ...],
///     "answer_echo": {"answers": ["...", {"when": "...", "answer": "..."}, ...],
///                     "sections": [["contexts:", "question:"], ...]},
///     "default": "..." }
///
/// answer_echo returns the first listed answer that appears verbatim between a
/// section's start and end markers in the last human message and whose `when`
/// text (if any) occurs anywhere in that message.
class MockChatBackend : public ChatBackend {
public:
    struct Rule {
        std::string contains;
        std::string respond;
    };
    struct EchoAnswer {
        std::string when;
        std::string answer;
    };
    struct AnswerEcho {
        std::vector<EchoAnswer> answers;
        std::vector<std::pair<std::string, std::string>> sections;
    };
    struct Call {
        ChatRequest request;
        std::string response;
        std::string source;  // rule, answer_echo, queue, default
    };

    MockChatBackend() = default;
    static std::shared_ptr<MockChatBackend> from_json(const nlohmann::json& script);
    static std::shared_ptr<MockChatBackend> from_file(const std::filesystem::path& path);

    void push(std::string response);
    void add_rule(std::string contains, std::string respond);
    void set_answer_echo(AnswerEcho echo);
    void set_default(std::string response);

    ChatResponse send(const ChatRequest& request) override;

    std::vector<Call> trace() const;
    std::size_t calls() const;
    std::size_t queued() const;

private:
    mutable std::mutex mutex_;
    std::deque<std::string> queue_;
    std::vector<Rule> rules_;
    std::optional<AnswerEcho> echo_;
    std::optional<std::string> default_;
    std::vector<Call> trace_;
};

}  // namespace classeval

#endif  // CLASSEVAL_BACKENDS_HPP
