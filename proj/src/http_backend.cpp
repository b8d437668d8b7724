#include <cstdlib>

#include "httplib.h"

#include "classeval/backends.hpp"

namespace classeval {

using nlohmann::json;

namespace {

constexpr std::size_t kExcerpt = 300;

std::string excerpt(const std::string& body) {
    return body.size() <= kExcerpt ? body : body.substr(0, kExcerpt) + "...";
}

}  // namespace

HttpChatBackend::HttpChatBackend(HttpOptions options) : options_(std::move(options)) {
    if (!options_.api_key_env.empty()) {
        if (const char* key = std::getenv(options_.api_key_env.c_str())) api_key_ = key;
    }
}

std::string HttpChatBackend::request_body(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", m.role == Role::System ? "system" : "user"}, {"content", m.content}});
    return json{{"model", request.model},
                {"messages", std::move(messages)},
                {"temperature", request.temperature},
                {"max_tokens", request.max_tokens}}
        .dump(-1, ' ', false, json::error_handler_t::strict);
}

ChatResponse HttpChatBackend::parse_response(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception&) {
        throw ProviderError(200, "unparseable body: " + excerpt(body));
    }
    const json* content = nullptr;
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const json& choice = j["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content") &&
            choice["message"]["content"].is_string())
            content = &choice["message"]["content"];
    }
    if (content == nullptr) throw ProviderError(200, "no message content: " + excerpt(body));

    ChatResponse out;
    out.text = content->get<std::string>();
    const json& choice = j["choices"][0];
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string())
        out.finish_reason = choice["finish_reason"].get<std::string>();
    if (j.contains("usage") && j["usage"].is_object()) {
        out.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
        out.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
    }
    for (const char* field : {"id", "model", "created", "system_fingerprint"})
        if (j.contains(field) && !j[field].is_null()) out.provider_metadata[field] = j[field];
    return out;
}

ChatResponse HttpChatBackend::send(const ChatRequest& request) {
    httplib::Client client(options_.base_url);
    const auto secs = static_cast<time_t>(options_.timeout.count());
    client.set_connection_timeout(secs);
    client.set_read_timeout(secs);
    client.set_write_timeout(secs);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto result = client.Post(options_.path, headers, request_body(request), "application/json");
    if (!result) throw TransportError("HTTP request failed: " + httplib::to_string(result.error()));
    const int status = result->status;
    if (status == 429) throw RateLimited("provider rate limit (HTTP 429): " + excerpt(result->body));
    if (status < 200 || status >= 300) throw ProviderError(status, excerpt(result->body));
    return parse_response(result->body);
}

}  // namespace classeval
