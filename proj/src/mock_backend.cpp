#include "classeval/backends.hpp"
#include "classeval/digest.hpp"

namespace classeval {

using nlohmann::json;

std::shared_ptr<MockChatBackend> MockChatBackend::from_json(const json& script) {
    auto mock = std::make_shared<MockChatBackend>();
    if (!script.is_object()) throw ConfigError("mock script must be a JSON object");
    for (const auto& [key, value] : script.items()) {
        if (key == "queue") {
            for (const auto& r : value) mock->push(r.get<std::string>());
        } else if (key == "rules") {
            for (const auto& r : value)
                mock->add_rule(r.at("contains").get<std::string>(), r.at("respond").get<std::string>());
        } else if (key == "answer_echo") {
            AnswerEcho echo;
            for (const auto& a : value.at("answers")) {
                if (a.is_string())
                    echo.answers.push_back({"", a.get<std::string>()});
                else
                    echo.answers.push_back({a.value("when", ""), a.at("answer").get<std::string>()});
            }
            if (value.contains("sections")) {
                for (const auto& s : value["sections"])
                    echo.sections.emplace_back(s.at(0).get<std::string>(), s.at(1).get<std::string>());
            } else {
                echo.sections.emplace_back("contexts:", "question:");
            }
            mock->set_answer_echo(std::move(echo));
        } else if (key == "default") {
            mock->set_default(value.get<std::string>());
        } else if (key != "comment") {
            throw ConfigError("unknown mock script key '" + key + "'");
        }
    }
    return mock;
}

std::shared_ptr<MockChatBackend> MockChatBackend::from_file(const std::filesystem::path& path) {
    try {
        return from_json(json::parse(read_file(path.string())));
    } catch (const json::exception& e) {
        throw ConfigError("mock script " + path.string() + ": " + e.what());
    }
}

void MockChatBackend::push(std::string response) {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(response));
}

void MockChatBackend::add_rule(std::string contains, std::string respond) {
    if (contains.empty()) throw ConfigError("mock rule with an empty key");
    std::lock_guard lock(mutex_);
    rules_.push_back({std::move(contains), std::move(respond)});
}

void MockChatBackend::set_answer_echo(AnswerEcho echo) {
    std::lock_guard lock(mutex_);
    echo_ = std::move(echo);
}

void MockChatBackend::set_default(std::string response) {
    std::lock_guard lock(mutex_);
    default_ = std::move(response);
}

namespace {

std::string_view last_human(const ChatRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it)
        if (it->role == Role::Human) return it->content;
    return {};
}

}  // namespace

ChatResponse MockChatBackend::send(const ChatRequest& request) {
    std::lock_guard lock(mutex_);
    const std::string_view prompt = last_human(request);
    std::string response;
    std::string source;

    const Rule* best = nullptr;
    for (const auto& rule : rules_)
        if (prompt.find(rule.contains) != std::string_view::npos &&
            (best == nullptr || rule.contains.size() > best->contains.size()))
            best = &rule;
    if (best != nullptr) {
        response = best->respond;
        source = "rule";
    }

    if (source.empty() && echo_) {
        for (const auto& [start_marker, end_marker] : echo_->sections) {
            const auto start = prompt.find(start_marker);
            if (start == std::string_view::npos) continue;
            const auto body_start = start + start_marker.size();
            const auto end = prompt.find(end_marker, body_start);
            const std::string_view section = prompt.substr(
                body_start, end == std::string_view::npos ? std::string_view::npos : end - body_start);
            for (const auto& [when, answer] : echo_->answers) {
                if (answer.empty() || section.find(answer) == std::string_view::npos) continue;
                if (!when.empty() && prompt.find(when) == std::string_view::npos) continue;
                response = answer;
                source = "answer_echo";
                break;
            }
            if (!source.empty()) break;
        }
    }

    if (source.empty() && !queue_.empty()) {
        response = std::move(queue_.front());
        queue_.pop_front();
        source = "queue";
    }
    if (source.empty() && default_) {
        response = *default_;
        source = "default";
    }
    if (source.empty()) throw ProviderError(404, "mock script exhausted");

    trace_.push_back(Call{request, response, source});
    ChatResponse out;
    out.text = std::move(response);
    out.finish_reason = "stop";
    out.provider_metadata = json{{"backend", "mock"}, {"source", source}};
    return out;
}

std::vector<MockChatBackend::Call> MockChatBackend::trace() const {
    std::lock_guard lock(mutex_);
    return trace_;
}

std::size_t MockChatBackend::calls() const {
    std::lock_guard lock(mutex_);
    return trace_.size();
}

std::size_t MockChatBackend::queued() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

}  // namespace classeval
