#include "classeval/llmclient.hpp"

#include <cmath>
#include <ctime>
#include <thread>

#include "classeval/digest.hpp"

namespace classeval {

using nlohmann::json;

std::string_view to_string(Role role) noexcept { return role == Role::System ? "system" : "human"; }

Role parse_role(std::string_view name) {
    if (name == "system") return Role::System;
    if (name == "human" || name == "user") return Role::Human;
    throw std::invalid_argument("unknown message role '" + std::string(name) + "'");
}

json request_to_json(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"content", m.content}, {"role", std::string(to_string(m.role))}});
    return json{{"max_tokens", request.max_tokens},
                {"messages", std::move(messages)},
                {"model", request.model},
                {"temperature", request.temperature}};
}

ChatRequest request_from_json(const json& j) {
    ChatRequest r;
    r.model = j.at("model").get<std::string>();
    r.temperature = j.at("temperature").get<double>();
    r.max_tokens = j.at("max_tokens").get<int>();
    for (const auto& m : j.at("messages"))
        r.messages.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
    return r;
}

std::string canonical_request(const ChatRequest& request) {
    return request_to_json(request).dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string cache_key(const ChatRequest& request) { return sha256_hex(canonical_request(request)); }

// ---------------------------------------------------------------------------

TokenBucket::TokenBucket(double per_minute, Clock::time_point start)
    : capacity_(per_minute), tokens_(per_minute), per_second_(per_minute / 60.0), last_(start) {
    if (per_minute < 0.0) throw std::invalid_argument("requests per minute must be >= 0");
}

std::optional<TokenBucket::Clock::duration> TokenBucket::try_acquire(Clock::time_point now) {
    std::lock_guard lock(mutex_);
    if (capacity_ == 0.0) return std::nullopt;
    if (now > last_) {
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        tokens_ = std::min(capacity_, tokens_ + elapsed * per_second_);
        last_ = now;
    }
    if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return std::nullopt;
    }
    const double wait = (1.0 - tokens_) / per_second_;
    return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(wait));
}

void TokenBucket::acquire() {
    for (;;) {
        const auto wait = try_acquire(Clock::now());
        if (!wait) return;
        std::this_thread::sleep_for(*wait);
    }
}

// ---------------------------------------------------------------------------

namespace {

bool valid_utf8(std::string_view s) {
    try {
        (void)json(std::string(s)).dump();
        return true;
    } catch (const json::type_error&) {
        return false;
    }
}

std::string hex_encode(std::string_view s) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(s.size() * 2);
    for (unsigned char c : s) {
        out.push_back(kDigits[c >> 4]);
        out.push_back(kDigits[c & 15]);
    }
    return out;
}

std::string hex_decode(std::string_view s) {
    if (s.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
    const auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw std::invalid_argument("bad hex digit");
    };
    std::string out;
    out.reserve(s.size() / 2);
    for (std::size_t i = 0; i < s.size(); i += 2)
        out.push_back(static_cast<char>(nibble(s[i]) * 16 + nibble(s[i + 1])));
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

}  // namespace

ChatClient::ChatClient(std::shared_ptr<ChatBackend> backend, ClientOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      bucket_(options_.requests_per_minute),
      in_flight_(static_cast<std::ptrdiff_t>(options_.max_in_flight)) {
    if (options_.max_in_flight == 0 || options_.max_in_flight > 1024)
        throw std::invalid_argument("max_in_flight must be in [1, 1024]");
    if (options_.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (!options_.sleep) options_.sleep = default_sleep;
    if (options_.mode == ClientMode::Live && !backend_)
        throw std::invalid_argument("live client needs a backend");
    if (options_.cache_dir) std::filesystem::create_directories(*options_.cache_dir);
}

ClientStats ChatClient::stats() const {
    return ClientStats{requests_.load(), cache_hits_.load(), backend_calls_.load(), retries_.load()};
}

std::optional<ChatResponse> ChatClient::read_cache(const std::filesystem::path& file) const {
    if (!std::filesystem::exists(file)) return std::nullopt;
    json entry;
    try {
        entry = json::parse(read_file(file.string()));
    } catch (const json::exception& e) {
        throw IoError("corrupt cache entry " + file.string() + ": " + e.what());
    }
    const json& r = entry.at("response");
    ChatResponse out;
    out.text = r.contains("text_hex") ? hex_decode(r.at("text_hex").get<std::string>())
                                      : r.at("text").get<std::string>();
    out.finish_reason = r.value("finish_reason", "");
    if (r.contains("usage")) {
        out.usage.prompt_tokens = r["usage"].value("prompt_tokens", std::int64_t{0});
        out.usage.completion_tokens = r["usage"].value("completion_tokens", std::int64_t{0});
    }
    out.provider_metadata = r.value("provider_metadata", json::object());
    out.from_cache = true;
    return out;
}

void ChatClient::write_cache(const std::filesystem::path& file, const ChatRequest& request,
                             const ChatResponse& response) const {
    json r{{"finish_reason", response.finish_reason},
           {"provider_metadata", response.provider_metadata},
           {"usage",
            {{"completion_tokens", response.usage.completion_tokens},
             {"prompt_tokens", response.usage.prompt_tokens}}}};
    if (valid_utf8(response.text))
        r["text"] = response.text;
    else
        r["text_hex"] = hex_encode(response.text);
    const json entry{{"key", file.stem().string()},
                     {"request", request_to_json(request)},
                     {"response", std::move(r)},
                     {"timestamp", utc_timestamp()}};
    write_file_atomic(file.string(), entry.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
}

ChatResponse ChatClient::call_with_retries(const ChatRequest& request) {
    for (int attempt = 0;; ++attempt) {
        try {
            bucket_.acquire();
            in_flight_.acquire();
            struct Release {
                std::counting_semaphore<1024>& s;
                ~Release() { s.release(); }
            } release{in_flight_};
            ++backend_calls_;
            return backend_->send(request);
        } catch (const ProviderError& e) {
            if (e.status() < 500 || attempt >= options_.max_retries) throw;
        } catch (const RateLimited&) {
            if (attempt >= options_.max_retries) throw;
        } catch (const TransportError&) {
            if (attempt >= options_.max_retries) throw;
        }
        ++retries_;
        options_.sleep(options_.base_backoff * (1LL << attempt));
    }
}

ChatResponse ChatClient::complete(const ChatRequest& request) {
    if (request.messages.empty()) throw std::invalid_argument("chat request needs at least one message");
    ++requests_;
    const std::string key = cache_key(request);
    if (!options_.cache_dir) {
        if (options_.mode == ClientMode::ReplayOnly) throw CacheMiss(key);
        return call_with_retries(request);
    }

    const std::filesystem::path file = *options_.cache_dir / (key + ".json");
    std::mutex& lock = key_locks_[std::hash<std::string>{}(key) % key_locks_.size()];
    std::lock_guard guard(lock);
    if (auto cached = read_cache(file)) {
        ++cache_hits_;
        return *cached;
    }
    if (options_.mode == ClientMode::ReplayOnly) throw CacheMiss(key);
    ChatResponse response = call_with_retries(request);
    write_cache(file, request, response);
    response.from_cache = false;
    return response;
}

}  // namespace classeval
