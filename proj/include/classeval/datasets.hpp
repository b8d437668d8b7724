#ifndef CLASSEVAL_DATASETS_HPP
#define CLASSEVAL_DATASETS_HPP

// Dataset records and their file formats:
//
//   QA   JSON lines, one object per record (fields as in QaRecord).
//   NER  "token<TAB>tag" lines, blank line between sentences.
//   MT   "source<TAB>reference[<TAB>reference...]" lines.
//
// Loaders validate strictly and throw SchemaError with the 1-based line.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "classeval/error.hpp"

namespace classeval {

enum class QaTopic { Ramayana, Ayurveda };

std::string_view to_string(QaTopic topic) noexcept;
QaTopic parse_topic(std::string_view name);
/// Name used in the {TOPIC} slot, in IAST.
std::string_view topic_label(QaTopic topic) noexcept;
/// Question categories per topic, as in the dataset description.
const std::vector<std::string_view>& topic_categories(QaTopic topic);

struct QaRecord {
    std::string id;
    QaTopic topic = QaTopic::Ramayana;
    std::string category;
    std::string question;
    std::optional<std::vector<std::string>> choices;
    std::vector<std::string> acceptable_answers;
    std::optional<std::vector<std::string>> acceptable_answers_lemmatized;
    bool requires_reasoning = false;
    std::optional<bool> answer_in_retrieved_context;
};

/// Choices joined by single spaces in source order; empty without choices.
std::string choices_text(const QaRecord& record);

struct NerRecord {
    std::vector<std::string> tokens;
    std::vector<std::string> gold_tags;
    std::string language;
};

struct MtRecord {
    std::string source;
    std::vector<std::string> references;
    std::string source_language;
    std::string target_language = "en";
};

std::vector<QaRecord> load_qa(const std::filesystem::path& path);
std::vector<QaRecord> parse_qa(std::string_view content);

/// With a nonempty `entity_types`, every tag must be O or B-/I- of a listed type.
std::vector<NerRecord> load_ner(const std::filesystem::path& path, const std::string& language,
                                const std::vector<std::string>& entity_types = {});
std::vector<NerRecord> parse_ner(std::string_view content, const std::string& language,
                                 const std::vector<std::string>& entity_types = {});

std::vector<MtRecord> load_mt(const std::filesystem::path& path, const std::string& source_language);
std::vector<MtRecord> parse_mt(std::string_view content, const std::string& source_language);

}  // namespace classeval

#endif  // CLASSEVAL_DATASETS_HPP
