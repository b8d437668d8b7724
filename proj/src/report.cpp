#include "classeval/report.hpp"

#include <system_error>

#include "classeval/digest.hpp"

namespace classeval {

std::string format_double(double v) { return nlohmann::json(v).dump(); }

std::string csv_field(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

namespace {

std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_field(fields[i]);
    }
    out.push_back('\n');
    return out;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

nlohmann::json summary_to_json(const ChunkedSummary& s) {
    return {{"n_chunks", s.n_chunks},   {"chunk_sizes", s.chunk_sizes}, {"chunk_means", s.per_chunk_means},
            {"mean", s.mean},           {"median", s.median},           {"q1", s.q1},
            {"q3", s.q3},               {"min", s.min},                 {"max", s.max},
            {"overall_mean", s.overall_mean}};
}

std::string items_csv(const MetricReport& r) {
    std::vector<std::string> header = {"index", "id", "prompt_id"};
    for (const auto& m : r.item_metrics) header.push_back(m);
    for (const char* h : {"in_context", "requires_reasoning", "flags", "error", "prediction", "gold", "raw_output"})
        header.push_back(h);
    std::string out = csv_row(header);
    for (const auto& row : r.items) {
        std::vector<std::string> f = {std::to_string(row.index), row.id, row.prompt_id};
        for (const auto& m : r.item_metrics) f.push_back(format_double(row.scores.at(m)));
        f.push_back(row.in_context ? (*row.in_context ? "true" : "false") : "");
        f.push_back(row.requires_reasoning ? "true" : "false");
        f.push_back(join(row.flags, ";"));
        f.push_back(row.error);
        f.push_back(row.prediction);
        f.push_back(join(row.gold, " | "));
        f.push_back(row.raw_output);
        out += csv_row(f);
    }
    return out;
}

std::string confusion_csv(const ConfusionMatrix& m, bool normalized) {
    std::vector<std::string> header = {"gold\\predicted"};
    header.insert(header.end(), m.labels.begin(), m.labels.end());
    std::string out = csv_row(header);
    for (std::size_t g = 0; g < m.labels.size(); ++g) {
        std::vector<std::string> f = {m.labels[g]};
        for (std::size_t p = 0; p < m.labels.size(); ++p)
            f.push_back(normalized ? format_double(m.row_normalized[g][p]) : std::to_string(m.counts[g][p]));
        out += csv_row(f);
    }
    return out;
}

std::string ner_tags_csv(const NerScore& s) {
    std::string out = csv_row({"tag", "tp", "fp", "fn", "precision", "recall", "f1"});
    for (const auto& [tag, t] : s.per_tag)
        out += csv_row({tag, std::to_string(t.tp), std::to_string(t.fp), std::to_string(t.fn),
                        format_double(t.precision), format_double(t.recall), format_double(t.f1)});
    return out;
}

void write(const std::filesystem::path& dir, const char* name, const std::string& content) {
    try {
        write_file_atomic((dir / name).string(), content);
    } catch (const std::exception& e) {
        throw IoError("cannot write " + (dir / name).string() + ": " + e.what());
    }
}

}  // namespace

nlohmann::json summary_json(const MetricReport& r) {
    nlohmann::json j;
    j["task"] = to_string(r.task);
    j["config"] = r.config_values;
    j["n_items"] = r.items.size();
    j["failed_items"] = r.failed_items;
    j["aggregates"] = r.aggregates;
    if (r.task == Task::QA && r.aggregates.count("em_inflected"))
        j["em"] = {{"Inflected", r.aggregates.at("em_inflected")}, {"Lemmatized", r.aggregates.at("em_lemmatized")}};
    nlohmann::json subsets = nlohmann::json::object();
    for (const auto& [name, s] : r.subsets) subsets[name] = {{"count", s.count}, {"means", s.means}};
    j["subsets"] = subsets;
    nlohmann::json summaries = nlohmann::json::object();
    for (const auto& [metric, s] : r.summaries) summaries[metric] = summary_to_json(s);
    j["summaries"] = summaries;
    if (r.ner) {
        nlohmann::json tags = nlohmann::json::object();
        for (const auto& [tag, t] : r.ner->per_tag)
            tags[tag] = {{"tp", t.tp}, {"fp", t.fp}, {"fn", t.fn},
                         {"precision", t.precision}, {"recall", t.recall}, {"f1", t.f1}};
        j["ner"] = {{"macro_f1", r.ner->macro_f1}, {"per_tag", tags}};
    }
    return j;
}

void write_report(const MetricReport& r, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    write(out_dir, "config.txt", r.config_text);
    write(out_dir, "items.csv", items_csv(r));
    write(out_dir, "summary.json", summary_json(r).dump(2) + "\n");

    nlohmann::json box = nlohmann::json::object();
    for (const auto& [metric, s] : r.summaries)
        box[metric] = {{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max},
                       {"mean", s.mean}, {"n_chunks", s.n_chunks}, {"chunk_means", s.per_chunk_means}};
    write(out_dir, "boxplot.json", box.dump(2) + "\n");

    if (r.ner) {
        write(out_dir, "confusion.csv", confusion_csv(r.ner->confusion, true));
        write(out_dir, "confusion_counts.csv", confusion_csv(r.ner->confusion, false));
        write(out_dir, "ner_tags.csv", ner_tags_csv(*r.ner));
    }
    if (!r.traces.empty()) {
        std::string lines;
        for (const auto& t : r.traces) lines += t.dump() + "\n";
        write(out_dir, "traces.jsonl", lines);
    }
    if (r.task == Task::QA) {
        std::string review = csv_row({"index", "id", "prediction", "gold", "em_inflected", "judgement"});
        for (const auto& row : r.items)
            if (row.requires_reasoning)
                review += csv_row({std::to_string(row.index), row.id, row.prediction, join(row.gold, " | "),
                                   format_double(row.scores.at("em_inflected")), ""});
        write(out_dir, "manual_review.csv", review);
    }
}

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

/// The published block that matches this run's axes, or null.
const nlohmann::json* matching_reference(const nlohmann::json& summary, const nlohmann::json& reference,
                                         std::string& title) {
    const auto& c = summary.at("config");
    const std::string task = summary.at("task");
    const std::string lang = c.value("language", "sa");
    const std::string prompt_lang = c.value("prompt_language", "en");
    const std::string mode = c.value("qa_mode", "closed");
    const auto get = [&](std::initializer_list<const char*> keys) -> const nlohmann::json* {
        const nlohmann::json* node = &reference;
        for (const char* k : keys) {
            if (!node->is_object() || !node->contains(k)) return nullptr;
            node = &(*node)[k];
        }
        return node;
    };
    if (task == "qa" && prompt_lang == "en" && mode != "tog") {
        title = "Published EM, English prompts";
        return get({"qa_em_by_inflection_english_prompts", mode == "rag" ? "rag_bm25" : "closed_book"});
    }
    if (task == "qa") {
        title = "Published EM, Sanskrit prompts";
        return get({"qa_em_kg_sanskrit_prompts", mode == "rag" ? "rag_bm25" : mode == "tog" ? "llm_kg" : "closed_book"});
    }
    if (lang == "sa" && prompt_lang == "en") {
        title = task == "mt" ? "Published BLEU by script" : "Published macro-F1 by script";
        return get({"sanskrit_by_script_english_prompts", task == "mt" ? "mt_bleu" : "ner_macro_f1"});
    }
    return nullptr;
}

std::string cell(const nlohmann::json& v) {
    if (v.is_number()) return fmt3(v.get<double>());
    if (v.is_object()) {
        std::vector<std::string> parts;
        for (const auto& [k, x] : v.items()) parts.push_back(k + " " + cell(x));
        return join(parts, ", ");
    }
    return v.dump();
}

}  // namespace

std::string render_markdown(const nlohmann::json& summary, const nlohmann::json& reference) {
    std::string md = "# Evaluation report\n\n";
    const auto& c = summary.at("config");
    md += "| setting | value |\n|---|---|\n";
    for (const char* k : {"task", "model", "language", "prompt_language", "script", "qa_mode", "retriever", "k",
                          "lemmatizer", "dataset"})
        if (c.contains(k)) md += std::string("| ") + k + " | " + c.at(k).get<std::string>() + " |\n";
    md += "\nItems: " + std::to_string(summary.at("n_items").get<std::size_t>()) + ", failed: " +
          std::to_string(summary.at("failed_items").get<std::size_t>()) + "\n\n## Scores\n\n| metric | value |\n|---|---|\n";
    const bool x100 = c.value("bleu_x100", "false") == "true";
    const auto shown = [&](const std::string& metric, double v) {
        return x100 && metric.find("bleu") != std::string::npos ? v * 100.0 : v;
    };
    for (const auto& [k, v] : summary.at("aggregates").items())
        md += "| " + k + " | " + fmt3(shown(k, v.get<double>())) + " |\n";

    if (!summary.at("subsets").empty()) {
        md += "\n## Answer in retrieved context\n\n| subset | items | EM inflected | EM lemmatized |\n|---|---|---|---|\n";
        for (const auto& [name, s] : summary.at("subsets").items()) {
            const auto& m = s.at("means");
            md += "| " + name + " | " + std::to_string(s.at("count").get<std::size_t>()) + " | " +
                  (m.contains("em_inflected") ? fmt3(m.at("em_inflected")) : "") + " | " +
                  (m.contains("em_lemmatized") ? fmt3(m.at("em_lemmatized")) : "") + " |\n";
        }
    }
    if (!summary.at("summaries").empty()) {
        md += "\n## Chunk means\n\n| metric | chunks | min | q1 | median | q3 | max |\n|---|---|---|---|---|---|---|\n";
        for (const auto& [name, s] : summary.at("summaries").items())
            md += "| " + name + " | " + std::to_string(s.at("n_chunks").get<std::size_t>()) + " | " +
                  fmt3(shown(name, s.at("min"))) + " | " + fmt3(shown(name, s.at("q1"))) + " | " +
                  fmt3(shown(name, s.at("median"))) + " | " + fmt3(shown(name, s.at("q3"))) + " | " +
                  fmt3(shown(name, s.at("max"))) + " |\n";
    }
    std::string title;
    if (const nlohmann::json* ref = matching_reference(summary, reference, title)) {
        md += "\n## " + title + "\n\n";
        if (reference.contains("note")) md += reference.at("note").get<std::string>() + "\n\n";
        md += "| model | scores |\n|---|---|\n";
        for (const auto& [model, v] : ref->items()) md += "| " + model + " | " + cell(v) + " |\n";
    }
    return md;
}

}  // namespace classeval
