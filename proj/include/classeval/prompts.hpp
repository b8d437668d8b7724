#ifndef CLASSEVAL_PROMPTS_HPP
#define CLASSEVAL_PROMPTS_HPP

// Prompt templates are UTF-8 files with a front-matter header and
// role-delimited sections:
//
//   id: qa_rag.sa
//   task: QA_rag
//   language: sa
//   script: slp1            (slp1 | iast | none)
//   placeholders: TOPIC, CONTEXTS, QUESTION, CHOICES
//   === system
//   ...
//   === human
//   ... {QUESTION} {CHOICES}
//
// {NAME} is a placeholder, {{ and }} are literal braces. In slp1/iast
// templates the text is Sanskrit and is rendered in the requested script;
// `backtick spans` are copied verbatim (for English terms and markup).

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "classeval/error.hpp"
#include "classeval/llmclient.hpp"
#include "classeval/textproc.hpp"

namespace classeval {

class UnknownTemplate : public Error {
public:
    explicit UnknownTemplate(const std::string& id) : Error("unknown prompt template '" + id + "'") {}
};

class MissingPlaceholder : public Error {
public:
    explicit MissingPlaceholder(const std::string& name)
        : Error("binding lacks placeholder {" + name + "}"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class TemplateError : public Error {
public:
    TemplateError(const std::string& file, const std::string& reason) : Error(file + ": " + reason) {}
};

class EmptyTagset : public Error {
public:
    explicit EmptyTagset(const std::string& language) : Error("empty entity tagset for " + language) {}
};

enum class PromptTask { NER, MT, QA_closed, QA_rag, ToG_step };

std::string_view to_string(PromptTask task) noexcept;
PromptTask parse_prompt_task(std::string_view name);

using Binding = std::map<std::string, std::string, std::less<>>;

struct PromptTemplate {
    struct Message {
        Role role = Role::Human;
        std::string text;
    };

    std::string id;
    PromptTask task = PromptTask::NER;
    std::string language;  // en, sa, la, grc
    /// Script of the stored Sanskrit text; empty for non-Sanskrit templates.
    std::optional<Script> script;
    std::vector<std::string> placeholders;  // declaration order
    std::vector<Message> messages;

    /// Throws MissingPlaceholder. Sanskrit text is emitted in `output_script`.
    std::vector<ChatMessage> render(const Binding& binding, Script output_script = Script::Devanagari) const;
};

PromptTemplate parse_template(std::string_view content, const std::string& origin = "<memory>");
PromptTemplate load_template(const std::filesystem::path& path);

/// Immutable after load.
class PromptRegistry {
public:
    /// Reads `manifest.txt` (id TAB file) from `dir`.
    static PromptRegistry load(const std::filesystem::path& dir);

    void add(PromptTemplate t);
    const PromptTemplate& get(std::string_view id) const;
    bool contains(std::string_view id) const;
    std::vector<std::string> ids() const;

    std::vector<ChatMessage> render(std::string_view id, const Binding& binding,
                                    Script output_script = Script::Devanagari) const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

/// Entity types of one language, in dataset order.
struct Tagset {
    std::string language;
    std::vector<std::string> types;
};

/// One type per line, '#' comments.
Tagset load_tagset(const std::filesystem::path& path, std::string language);
/// `<dir>/<language>.txt`.
Tagset load_tagset_for(const std::filesystem::path& dir, const std::string& language);

/// "PER, LOC, GRP". Throws EmptyTagset.
std::string entity_type_list(const Tagset& tagset);

}  // namespace classeval

#endif  // CLASSEVAL_PROMPTS_HPP
