#include "classeval/prompts.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "classeval/digest.hpp"

namespace classeval {

std::string_view to_string(PromptTask task) noexcept {
    switch (task) {
        case PromptTask::NER: return "NER";
        case PromptTask::MT: return "MT";
        case PromptTask::QA_closed: return "QA_closed";
        case PromptTask::QA_rag: return "QA_rag";
        case PromptTask::ToG_step: return "ToG_step";
    }
    return "?";
}

PromptTask parse_prompt_task(std::string_view name) {
    for (PromptTask t : {PromptTask::NER, PromptTask::MT, PromptTask::QA_closed, PromptTask::QA_rag,
                         PromptTask::ToG_step})
        if (to_string(t) == name) return t;
    throw std::invalid_argument("unknown prompt task '" + std::string(name) + "'");
}

namespace {

enum class SegmentKind { Literal, Verbatim, Placeholder };

struct Segment {
    SegmentKind kind;
    std::string text;
};

bool placeholder_char(char c) { return (c >= 'A' && c <= 'Z') || c == ' ' || c == '_'; }

std::vector<Segment> segments(std::string_view text, const std::string& origin) {
    std::vector<Segment> out;
    std::string literal;
    const auto flush = [&] {
        if (!literal.empty()) out.push_back({SegmentKind::Literal, std::move(literal)});
        literal.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '{' && i + 1 < text.size() && text[i + 1] == '{') {
            literal.push_back('{');
            ++i;
        } else if (c == '}' && i + 1 < text.size() && text[i + 1] == '}') {
            literal.push_back('}');
            ++i;
        } else if (c == '{') {
            const auto close = text.find('}', i + 1);
            const std::string_view name =
                close == std::string_view::npos ? std::string_view{} : text.substr(i + 1, close - i - 1);
            if (name.empty() || name.front() < 'A' || name.front() > 'Z' ||
                !std::all_of(name.begin(), name.end(), placeholder_char))
                throw TemplateError(origin, "malformed placeholder at byte " + std::to_string(i));
            flush();
            out.push_back({SegmentKind::Placeholder, std::string(name)});
            i = close;
        } else if (c == '}') {
            throw TemplateError(origin, "unmatched '}' at byte " + std::to_string(i));
        } else if (c == '`') {
            const auto close = text.find('`', i + 1);
            if (close == std::string_view::npos)
                throw TemplateError(origin, "unterminated verbatim span at byte " + std::to_string(i));
            flush();
            out.push_back({SegmentKind::Verbatim, std::string(text.substr(i + 1, close - i - 1))});
            i = close;
        } else {
            literal.push_back(c);
        }
    }
    flush();
    return out;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

std::vector<ChatMessage> PromptTemplate::render(const Binding& binding, Script output_script) const {
    std::vector<ChatMessage> out;
    out.reserve(messages.size());
    for (const auto& m : messages) {
        std::string text;
        for (const auto& seg : segments(m.text, id)) {
            switch (seg.kind) {
                case SegmentKind::Literal:
                    text += script ? transliterate(seg.text, *script, output_script) : seg.text;
                    break;
                case SegmentKind::Verbatim:
                    text += seg.text;
                    break;
                case SegmentKind::Placeholder: {
                    const auto it = binding.find(seg.text);
                    if (it == binding.end()) throw MissingPlaceholder(seg.text);
                    text += it->second;
                    break;
                }
            }
        }
        out.push_back({m.role, std::move(text)});
    }
    return out;
}

PromptTemplate parse_template(std::string_view content, const std::string& origin) {
    PromptTemplate t;
    std::istringstream in{std::string(content)};
    std::string line;
    std::set<std::string> seen_keys;
    bool in_body = false;
    std::string* current = nullptr;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("=== ", 0) == 0) {
            in_body = true;
            const std::string role(trim(std::string_view(line).substr(4)));
            Role r;
            try {
                r = parse_role(role);
            } catch (const std::invalid_argument&) {
                throw TemplateError(origin, "line " + std::to_string(lineno) + ": unknown role '" + role + "'");
            }
            t.messages.push_back({r, {}});
            current = nullptr;
            continue;
        }
        if (in_body) {
            std::string& text = t.messages.back().text;
            if (current != nullptr) text.push_back('\n');
            text += line;
            current = &text;
            continue;
        }
        if (trim(line).empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            throw TemplateError(origin, "line " + std::to_string(lineno) + ": expected 'key: value'");
        const std::string key(trim(std::string_view(line).substr(0, colon)));
        const std::string value(trim(std::string_view(line).substr(colon + 1)));
        if (!seen_keys.insert(key).second)
            throw TemplateError(origin, "duplicate header key '" + key + "'");
        try {
            if (key == "id") {
                t.id = value;
            } else if (key == "task") {
                t.task = parse_prompt_task(value);
            } else if (key == "language") {
                t.language = value;
            } else if (key == "script") {
                if (value != "none") t.script = parse_script(value);
            } else if (key == "placeholders") {
                std::string_view rest = value;
                while (!rest.empty()) {
                    const auto comma = rest.find(',');
                    const std::string name(trim(rest.substr(0, comma)));
                    if (!name.empty()) t.placeholders.push_back(name);
                    if (comma == std::string_view::npos) break;
                    rest.remove_prefix(comma + 1);
                }
            } else {
                throw TemplateError(origin, "unknown header key '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw TemplateError(origin, e.what());
        } catch (const UnknownScript& e) {
            throw TemplateError(origin, e.what());
        }
    }
    for (const char* required : {"id", "task", "language", "script", "placeholders"})
        if (!seen_keys.count(required)) throw TemplateError(origin, std::string("missing header '") + required + "'");
    if (t.messages.empty()) throw TemplateError(origin, "no message sections");

    std::set<std::string> declared(t.placeholders.begin(), t.placeholders.end());
    if (declared.size() != t.placeholders.size()) throw TemplateError(origin, "placeholder declared twice");
    std::set<std::string> used;
    for (const auto& m : t.messages)
        for (const auto& seg : segments(m.text, origin))
            if (seg.kind == SegmentKind::Placeholder) used.insert(seg.text);
    for (const auto& name : used)
        if (!declared.count(name)) throw TemplateError(origin, "undeclared placeholder {" + name + "}");
    for (const auto& name : declared)
        if (!used.count(name)) throw TemplateError(origin, "declared placeholder {" + name + "} never used");
    return t;
}

PromptTemplate load_template(const std::filesystem::path& path) {
    return parse_template(read_file(path.string()), path.string());
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& dir) {
    const auto manifest = dir / "manifest.txt";
    PromptRegistry registry;
    std::size_t lineno = 0;
    for (const auto& raw : read_lines(manifest.string())) {
        ++lineno;
        const std::string_view line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw ParseError(lineno, manifest.string() + ": expected id<TAB>file");
        const std::string id(trim(line.substr(0, tab)));
        PromptTemplate t = load_template(dir / std::string(trim(line.substr(tab + 1))));
        if (t.id != id) throw TemplateError(manifest.string(), "manifest id '" + id + "' names template '" + t.id + "'");
        registry.add(std::move(t));
    }
    return registry;
}

void PromptRegistry::add(PromptTemplate t) {
    const std::string id = t.id;
    if (!templates_.emplace(id, std::move(t)).second) throw TemplateError(id, "duplicate template id");
}

const PromptTemplate& PromptRegistry::get(std::string_view id) const {
    const auto it = templates_.find(id);
    if (it == templates_.end()) throw UnknownTemplate(std::string(id));
    return it->second;
}

bool PromptRegistry::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

std::vector<std::string> PromptRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, t] : templates_) out.push_back(id);
    return out;
}

std::vector<ChatMessage> PromptRegistry::render(std::string_view id, const Binding& binding,
                                                Script output_script) const {
    return get(id).render(binding, output_script);
}

Tagset load_tagset(const std::filesystem::path& path, std::string language) {
    Tagset t{std::move(language), {}};
    for (const auto& raw : read_lines(path.string())) {
        const std::string_view line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        t.types.emplace_back(nfc(line));
    }
    return t;
}

Tagset load_tagset_for(const std::filesystem::path& dir, const std::string& language) {
    return load_tagset(dir / (language + ".txt"), language);
}

std::string entity_type_list(const Tagset& tagset) {
    if (tagset.types.empty()) throw EmptyTagset(tagset.language);
    std::string out;
    for (std::size_t i = 0; i < tagset.types.size(); ++i) {
        if (i) out += ", ";
        out += tagset.types[i];
    }
    return out;
}

}  // namespace classeval
