#include "classeval/datasets.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

#include "classeval/digest.hpp"
#include "classeval/textproc.hpp"

namespace classeval {

using nlohmann::json;

std::string_view to_string(QaTopic topic) noexcept {
    return topic == QaTopic::Ramayana ? "Ramayana" : "Ayurveda";
}

QaTopic parse_topic(std::string_view name) {
    if (name == "Ramayana") return QaTopic::Ramayana;
    if (name == "Ayurveda") return QaTopic::Ayurveda;
    throw std::invalid_argument("unknown topic '" + std::string(name) + "'");
}

std::string_view topic_label(QaTopic topic) noexcept {
    return topic == QaTopic::Ramayana ? "Rāmāyaṇa" : "Āyurveda";
}

const std::vector<std::string_view>& topic_categories(QaTopic topic) {
    static const std::vector<std::string_view> kRamayana = {
        "Names",     "Actions", "Origins",  "Numeric",      "Quotes", "Boons and Curses", "Weapons",
        "Locations", "Kinship", "Slay",     "Kingdoms",     "Incarnations", "MCQ",       "Miscellaneous"};
    static const std::vector<std::string_view> kAyurveda = {
        "Synonym", "Type",   "Property",  "Comparison", "Consumption", "Count",         "Quantity",
        "Time-Location", "Effect", "Treatment", "Method", "Meta", "Multi-Concept", "Miscellaneous"};
    return topic == QaTopic::Ramayana ? kRamayana : kAyurveda;
}

std::string choices_text(const QaRecord& record) {
    std::string out;
    if (!record.choices) return out;
    for (const auto& c : *record.choices) {
        if (!out.empty()) out += ' ';
        out += c;
    }
    return out;
}

// ---------------------------------------------------------------------------
// QA

namespace {

std::vector<std::string_view> split_lines(std::string_view content) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= content.size()) {
        const auto nl = content.find('\n', start);
        std::string_view line = content.substr(start, nl == std::string_view::npos ? std::string_view::npos
                                                                                   : nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (!lines.empty() && lines.front().substr(0, 3) == "\xEF\xBB\xBF") lines.front().remove_prefix(3);
    return lines;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t") == std::string_view::npos; }

std::string required_string(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key)) throw SchemaError(line, std::string("missing field '") + key + "'");
    const json& v = j[key];
    if (!v.is_string()) throw SchemaError(line, std::string("field '") + key + "' must be a string");
    std::string s = nfc(v.get<std::string>());
    if (blank(s)) throw SchemaError(line, std::string("field '") + key + "' is empty");
    return s;
}

std::vector<std::string> string_list(const json& v, const char* key, std::size_t line) {
    if (!v.is_array()) throw SchemaError(line, std::string("field '") + key + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw SchemaError(line, std::string("field '") + key + "' must be a list of strings");
        out.push_back(nfc(e.get<std::string>()));
    }
    return out;
}

QaRecord qa_from_json(const json& j, std::size_t line) {
    static const std::set<std::string> kKnown = {
        "id", "topic", "category", "question", "choices", "acceptable_answers",
        "acceptable_answers_lemmatized", "requires_reasoning", "answer_in_retrieved_context"};
    if (!j.is_object()) throw SchemaError(line, "record must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!kKnown.count(key)) throw SchemaError(line, "unknown field '" + key + "'");

    QaRecord r;
    r.id = required_string(j, "id", line);
    try {
        r.topic = parse_topic(required_string(j, "topic", line));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(line, e.what());
    }
    r.category = required_string(j, "category", line);
    const auto& cats = topic_categories(r.topic);
    if (std::find(cats.begin(), cats.end(), r.category) == cats.end())
        throw SchemaError(line, "category '" + r.category + "' is not a " + std::string(to_string(r.topic)) +
                                    " category");
    r.question = required_string(j, "question", line);
    if (j.contains("choices") && !j["choices"].is_null()) r.choices = string_list(j["choices"], "choices", line);

    if (!j.contains("acceptable_answers")) throw SchemaError(line, "missing field 'acceptable_answers'");
    r.acceptable_answers = string_list(j["acceptable_answers"], "acceptable_answers", line);
    if (r.acceptable_answers.empty()) throw SchemaError(line, "acceptable_answers is empty");
    for (const auto& a : r.acceptable_answers)
        if (blank(a)) throw SchemaError(line, "acceptable_answers has an empty answer");
    if (j.contains("acceptable_answers_lemmatized") && !j["acceptable_answers_lemmatized"].is_null()) {
        r.acceptable_answers_lemmatized =
            string_list(j["acceptable_answers_lemmatized"], "acceptable_answers_lemmatized", line);
        if (r.acceptable_answers_lemmatized->empty())
            throw SchemaError(line, "acceptable_answers_lemmatized is empty");
    }
    if (j.contains("requires_reasoning")) {
        if (!j["requires_reasoning"].is_boolean()) throw SchemaError(line, "requires_reasoning must be a boolean");
        r.requires_reasoning = j["requires_reasoning"].get<bool>();
    }
    if (j.contains("answer_in_retrieved_context") && !j["answer_in_retrieved_context"].is_null()) {
        if (!j["answer_in_retrieved_context"].is_boolean())
            throw SchemaError(line, "answer_in_retrieved_context must be a boolean or null");
        r.answer_in_retrieved_context = j["answer_in_retrieved_context"].get<bool>();
    }
    return r;
}

}  // namespace

std::vector<QaRecord> parse_qa(std::string_view content) {
    std::vector<QaRecord> out;
    std::set<std::string> ids;
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::parse_error& e) {
            throw SchemaError(i + 1, std::string("invalid JSON: ") + e.what());
        }
        QaRecord r = qa_from_json(j, i + 1);
        if (!ids.insert(r.id).second) throw SchemaError(i + 1, "duplicate id '" + r.id + "'");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<QaRecord> load_qa(const std::filesystem::path& path) { return parse_qa(read_file(path.string())); }

// ---------------------------------------------------------------------------
// NER

namespace {

std::vector<std::string> fields_of(std::string_view line) {
    std::vector<std::string> out;
    for (auto& t : tokenize(line)) out.push_back(std::move(t.surface));
    return out;
}

void check_tag(const std::string& tag, const std::set<std::string, std::less<>>& types, std::size_t line) {
    if (tag == "O") return;
    if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-')
        throw SchemaError(line, "tag '" + tag + "' is not O, B-<type> or I-<type>");
    if (!types.empty() && !types.count(std::string_view(tag).substr(2)))
        throw SchemaError(line, "entity type '" + tag.substr(2) + "' is not in the tagset");
}

}  // namespace

std::vector<NerRecord> parse_ner(std::string_view content, const std::string& language,
                                 const std::vector<std::string>& entity_types) {
    std::set<std::string, std::less<>> types;
    for (const auto& t : entity_types) types.insert(nfc(t));
    std::vector<NerRecord> out;
    NerRecord current;
    current.language = language;
    const auto finish = [&] {
        if (!current.tokens.empty()) out.push_back(std::move(current));
        current = NerRecord{};
        current.language = language;
    };
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) {
            finish();
            continue;
        }
        const auto fields = fields_of(lines[i]);
        if (fields.size() != 2)
            throw SchemaError(i + 1, "expected a token and a tag, got " + std::to_string(fields.size()) + " fields");
        const std::string tag = nfc(fields[1]);
        check_tag(tag, types, i + 1);
        current.tokens.push_back(nfc(fields[0]));
        current.gold_tags.push_back(tag);
    }
    finish();
    return out;
}

std::vector<NerRecord> load_ner(const std::filesystem::path& path, const std::string& language,
                                const std::vector<std::string>& entity_types) {
    return parse_ner(read_file(path.string()), language, entity_types);
}

// ---------------------------------------------------------------------------
// MT

std::vector<MtRecord> parse_mt(std::string_view content, const std::string& source_language) {
    std::vector<MtRecord> out;
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (;;) {
            const auto tab = lines[i].find('\t', start);
            cols.emplace_back(lines[i].substr(start, tab == std::string_view::npos ? std::string_view::npos
                                                                                 : tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (cols.size() < 2) throw SchemaError(i + 1, "missing reference column");
        MtRecord r;
        r.source_language = source_language;
        r.source = normalize(cols[0]);
        if (r.source.empty()) throw SchemaError(i + 1, "empty source");
        for (std::size_t c = 1; c < cols.size(); ++c) {
            std::string ref = normalize(cols[c]);
            if (ref.empty()) throw SchemaError(i + 1, "empty reference in column " + std::to_string(c + 1));
            r.references.push_back(std::move(ref));
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<MtRecord> load_mt(const std::filesystem::path& path, const std::string& source_language) {
    return parse_mt(read_file(path.string()), source_language);
}

}  // namespace classeval
