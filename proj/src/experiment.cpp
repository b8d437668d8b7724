#include "classeval/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>

#include <spdlog/spdlog.h>

#include "classeval/backends.hpp"
#include "classeval/datasets.hpp"
#include "classeval/kg.hpp"
#include "classeval/parsers.hpp"
#include "classeval/prompts.hpp"
#include "classeval/tog.hpp"

namespace classeval {

std::unique_ptr<Lemmatizer> make_lemmatizer(const ExperimentConfig& config) {
    if (config.lemmatizer == "lexicon") return std::make_unique<LexiconLemmatizer>(config.lexicon, config.lexicon_script);
    if (config.lemmatizer == "external") {
        ExternalLemmatizerOptions o;
        o.command = config.lemmatizer_command;
        o.io_script = config.lemmatizer_script;
        o.timeout = std::chrono::seconds(config.lemmatizer_timeout_s);
        o.pool_size = std::max<std::size_t>(1, config.workers);
        return std::make_unique<ExternalLemmatizer>(std::move(o));
    }
    return std::make_unique<IdentityLemmatizer>();
}

std::shared_ptr<ChatBackend> make_backend(const ExperimentConfig& config) {
    if (config.llm.backend == "mock") return MockChatBackend::from_file(config.llm.mock_script);
    HttpOptions o;
    o.base_url = config.llm.base_url;
    o.path = config.llm.path;
    o.api_key_env = config.llm.api_key_env;
    o.timeout = std::chrono::seconds(config.llm.timeout_s);
    return std::make_shared<HttpChatBackend>(std::move(o));
}

std::unique_ptr<ChatClient> make_client(const ExperimentConfig& config, std::shared_ptr<ChatBackend> backend) {
    if (!backend) backend = make_backend(config);
    ClientOptions o;
    o.mode = config.llm.replay_only ? ClientMode::ReplayOnly : ClientMode::Live;
    if (!config.cache_dir.empty()) o.cache_dir = config.cache_dir;
    o.max_retries = config.llm.max_retries;
    o.base_backoff = std::chrono::milliseconds(config.llm.backoff_ms);
    o.requests_per_minute = config.llm.requests_per_minute;
    o.max_in_flight = config.llm.max_in_flight;
    return std::make_unique<ChatClient>(std::move(backend), std::move(o));
}

RetrievalIndex build_index(const ExperimentConfig& config, const Lemmatizer& lemmatizer) {
    if (config.corpus.empty()) throw ConfigError("no corpus configured");
    const auto lines = read_lines(config.corpus.string());
    auto chunks = chunk_corpus(lines, config.chunk_lines, config.chunk_overlap);
    std::optional<std::filesystem::path> cache;
    if (!config.cache_dir.empty()) cache = config.cache_dir / "lemmas";
    chunks = lemmatize_corpus(std::move(chunks), lemmatizer, config.corpus_script, cache);
    return RetrievalIndex::build(std::move(chunks), config.bm25);
}

std::string format_contexts(const std::vector<std::string>& texts) {
    std::string out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (i) out.push_back('\n');
        std::string flat = texts[i];
        std::replace(flat.begin(), flat.end(), '\n', ' ');
        out += std::to_string(i + 1) + ". " + normalize(flat);
    }
    return out;
}

namespace {

std::string language_name(const std::string& language) {
    if (language == "sa") return "Sanskrit";
    if (language == "la") return "Latin";
    if (language == "grc") return "Ancient Greek";
    return language;
}

std::string prompt_id(const std::string& task, const ExperimentConfig& config) {
    return task + "." + (config.prompt_language == "en" ? std::string("en") : config.language);
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

void flag(ItemRow& row, const std::string& f) {
    if (std::find(row.flags.begin(), row.flags.end(), f) == row.flags.end()) row.flags.push_back(f);
}

/// Runs `work(i)` for every index on up to `workers` threads; the first
/// exception is rethrown after all threads stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& work) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

ChatRequest make_request(const ExperimentConfig& config, std::vector<ChatMessage> messages) {
    ChatRequest r;
    r.model = config.model;
    r.messages = std::move(messages);
    r.temperature = config.temperature;
    r.max_tokens = config.max_tokens;
    return r;
}

/// Calls the model; a library error is recorded on the row and returns false.
bool call_model(ChatClient& client, const ChatRequest& request, ItemRow& row) {
    try {
        row.raw_output = client.complete(request).text;
        return true;
    } catch (const Error& e) {
        row.error = e.what();
        flag(row, "llm_error");
        spdlog::warn("item {} ({}): {}", row.index, row.id, e.what());
        return false;
    }
}

// ---------------------------------------------------------------------------
// QA

struct QaContext {
    const ExperimentConfig& config;
    ChatClient& client;
    const PromptRegistry& prompts;
    const Lemmatizer& lemmatizer;
    const ExactMatcher& matcher;
    const RetrievalIndex* index = nullptr;
    RetrieverKind retriever;
    const TogEngine* tog = nullptr;
};

bool answer_in_contexts(const QaRecord& record, const std::string& contexts, const ExperimentConfig& config) {
    const std::string haystack = normalize(contexts);
    for (const auto& a : record.acceptable_answers) {
        const std::string needle = normalize(transliterate(a, config.dataset_script, config.script));
        if (!needle.empty() && haystack.find(needle) != std::string::npos) return true;
    }
    return false;
}

void run_qa_item(const QaContext& ctx, const QaRecord& record, ItemRow& row, nlohmann::json& trace) {
    const ExperimentConfig& cfg = ctx.config;
    row.input = record.question;
    row.gold = record.acceptable_answers;
    row.requires_reasoning = record.requires_reasoning;
    if (record.requires_reasoning) flag(row, "manual_review");
    row.in_context = record.answer_in_retrieved_context;
    row.scores = {{"em_inflected", 0.0}, {"em_lemmatized", 0.0}};

    bool ok = false;
    if (cfg.qa_mode == QaMode::Tog) {
        row.prompt_id = "tog.answer";
        try {
            TogConfig tc = cfg.tog;
            tc.seed = cfg.seed;
            TogResult result = ctx.tog->answer(record, tc);
            row.raw_output = result.answer;
            trace = to_json(result.trace);
            trace["id"] = record.id;
            row.extra["llm_calls"] = result.trace.llm_calls;
            ok = true;
        } catch (const Error& e) {
            row.error = e.what();
            flag(row, "llm_error");
            trace = {{"id", record.id}, {"error", e.what()}};
        }
    } else {
        Binding b;
        b["TOPIC"] = transliterate(topic_label(record.topic), Script::IAST, cfg.script);
        b["QUESTION"] = transliterate(record.question, cfg.dataset_script, cfg.script);
        b["CHOICES"] = transliterate(choices_text(record), cfg.dataset_script, cfg.script);
        if (cfg.qa_mode == QaMode::Rag) {
            row.prompt_id = prompt_id("qa_rag", cfg);
            const TopK top = top_k(*ctx.index, record.question, cfg.dataset_script, ctx.lemmatizer, cfg.k,
                                   ctx.retriever);
            std::vector<std::string> texts;
            nlohmann::json hits = nlohmann::json::array();
            for (const auto& h : top.hits) {
                const auto& chunk = ctx.index->chunks()[ctx.index->position(h.chunk_id)];
                texts.push_back(transliterate(chunk.raw_text, cfg.corpus_script, cfg.script));
                hits.push_back({{"chunk", h.chunk_id}, {"score", h.score}});
            }
            if (top.zero_query_vector) flag(row, "zero_query_vector");
            row.extra["retrieved"] = std::move(hits);
            b["CONTEXTS"] = format_contexts(texts);
            if (!row.in_context) row.in_context = answer_in_contexts(record, b["CONTEXTS"], cfg);
        } else {
            row.prompt_id = prompt_id("qa_closed", cfg);
        }
        const auto messages = ctx.prompts.render(row.prompt_id, b, cfg.script);
        ok = call_model(ctx.client, make_request(cfg, messages), row);
    }
    if (!ok) return;
    row.prediction = normalize(row.raw_output);
    row.scores["em_inflected"] = ctx.matcher.score(row.prediction, record.acceptable_answers, EmMode::Inflected);
    row.scores["em_lemmatized"] = ctx.matcher.score_lemmatized(
        row.prediction, record.acceptable_answers,
        record.acceptable_answers_lemmatized.value_or(std::vector<std::string>{}));
}

void run_qa(const ExperimentConfig& cfg, ChatClient& client, const PromptRegistry& prompts, MetricReport& report) {
    const auto records = load_qa(cfg.dataset);
    const auto lemmatizer = make_lemmatizer(cfg);
    const ExactMatcher matcher(cfg.dataset_script, cfg.script, lemmatizer.get());
    QaContext ctx{cfg, client, prompts, *lemmatizer, matcher, nullptr, Bm25Retriever{}, nullptr};

    std::optional<RetrievalIndex> index;
    EmbeddingTable table;
    std::optional<EmbeddingIndex> emb_index;
    std::optional<KnowledgeGraph> kg;
    std::optional<TogEngine> tog;
    if (cfg.qa_mode == QaMode::Rag) {
        index = cfg.index.empty() ? build_index(cfg, *lemmatizer) : load_index(cfg.index);
        ctx.index = &*index;
        if (cfg.retriever == "avg_embedding") {
            table = load_embeddings(cfg.embeddings, cfg.embeddings_script);
            emb_index.emplace(*index, table);
            ctx.retriever = AvgEmbeddingRetriever{&*emb_index};
        }
    } else if (cfg.qa_mode == QaMode::Tog) {
        kg = load_kg(cfg.kg, KgLoadOptions{cfg.kg_script, true});
        TogOptions o;
        o.model = cfg.model;
        o.temperature = cfg.temperature;
        o.max_tokens = cfg.max_tokens;
        o.dataset_script = cfg.dataset_script;
        o.prompt_script = cfg.script;
        tog.emplace(*kg, client, prompts, *lemmatizer, o);
        ctx.tog = &*tog;
    }

    report.item_metrics = {"em_inflected", "em_lemmatized"};
    report.items.resize(records.size());
    std::vector<nlohmann::json> traces(records.size());
    parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
        ItemRow& row = report.items[i];
        row.index = i;
        row.id = records[i].id;
        run_qa_item(ctx, records[i], row, traces[i]);
    });
    if (cfg.qa_mode == QaMode::Tog) report.traces = std::move(traces);
}

// ---------------------------------------------------------------------------
// NER

void run_ner(const ExperimentConfig& cfg, ChatClient& client, const PromptRegistry& prompts, MetricReport& report) {
    const Tagset tagset = load_tagset_for(cfg.tagsets_dir, cfg.language);
    const auto records = load_ner(cfg.dataset, cfg.language, tagset.types);
    const bool sanskrit = cfg.language == "sa";
    const std::string id = prompt_id("ner", cfg);
    const std::string types = entity_type_list(tagset);

    report.item_metrics = {"f1"};
    report.items.resize(records.size());
    std::vector<NerAlignment> alignments(records.size());
    std::vector<std::vector<Token>> sentences(records.size());

    parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
        const NerRecord& rec = records[i];
        ItemRow& row = report.items[i];
        row.index = i;
        row.id = std::to_string(i + 1);
        row.prompt_id = id;
        row.input = join_words(rec.tokens);
        row.gold = rec.gold_tags;
        row.scores["f1"] = 0.0;
        for (std::size_t t = 0; t < rec.tokens.size(); ++t) sentences[i].push_back({rec.tokens[t], t});
        alignments[i].tags.assign(rec.tokens.size(), std::string(kOutsideTag));

        Binding b;
        b["LANGUAGE"] = language_name(cfg.language);
        b["ENTITY TYPES"] = types;
        b["INPUT"] = sanskrit ? transliterate(row.input, cfg.dataset_script, cfg.script) : row.input;
        if (!call_model(client, make_request(cfg, prompts.render(id, b, cfg.script)), row)) return;

        TaggedDictParse parsed = parse_tagged_dict(row.raw_output);
        if (parsed.failed) {
            flag(row, "parse_failed");
            row.error = parsed.error;
        }
        if (sanskrit)
            for (auto& [tag, words] : parsed.prediction.entries)
                for (auto& w : words) w = transliterate(w, cfg.script, cfg.dataset_script);
        nlohmann::json pred = nlohmann::json::object();
        for (const auto& [tag, words] : parsed.prediction.entries) pred[tag] = words;
        row.prediction = pred.dump();
        alignments[i] = align_ner(sentences[i], parsed.prediction);
        if (!alignments[i].spurious.empty()) {
            flag(row, "spurious_words");
            row.extra["spurious"] = alignments[i].spurious.size();
        }
        row.scores["f1"] = ner_macro_f1({rec.gold_tags}, {alignments[i]}).macro_f1;
    });

    std::vector<std::vector<std::string>> gold;
    for (const auto& r : records) gold.push_back(r.gold_tags);
    report.ner = ner_macro_f1(gold, alignments);
}

// ---------------------------------------------------------------------------
// MT

void run_mt(const ExperimentConfig& cfg, ChatClient& client, const PromptRegistry& prompts, MetricReport& report) {
    const auto records = load_mt(cfg.dataset, cfg.language);
    const bool sanskrit = cfg.language == "sa";
    const std::string id = prompt_id("mt", cfg);
    report.item_metrics = {"sentence_bleu"};
    report.items.resize(records.size());
    parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
        const MtRecord& rec = records[i];
        ItemRow& row = report.items[i];
        row.index = i;
        row.id = std::to_string(i + 1);
        row.prompt_id = id;
        row.input = rec.source;
        row.gold = rec.references;
        row.scores["sentence_bleu"] = 0.0;
        Binding b;
        b["LANGUAGE"] = language_name(cfg.language);
        b["INPUT"] = sanskrit ? transliterate(rec.source, cfg.dataset_script, cfg.script) : rec.source;
        if (!call_model(client, make_request(cfg, prompts.render(id, b, cfg.script)), row)) return;
        row.prediction = normalize(row.raw_output);
        row.scores["sentence_bleu"] = sentence_bleu(row.prediction, rec.references);
    });
    std::vector<std::string> candidates;
    std::vector<std::vector<std::string>> references;
    for (std::size_t i = 0; i < records.size(); ++i) {
        candidates.push_back(report.items[i].prediction);
        references.push_back(records[i].references);
    }
    if (!records.empty()) report.aggregates["bleu"] = corpus_bleu(candidates, references);
}

}  // namespace

void finalize_report(MetricReport& report, std::size_t n_chunks, std::optional<std::uint64_t> shuffle_seed) {
    report.failed_items = 0;
    for (const auto& row : report.items) {
        const auto has = [&](const char* f) { return std::find(row.flags.begin(), row.flags.end(), f) != row.flags.end(); };
        if (has("llm_error") || has("parse_failed")) ++report.failed_items;
    }
    for (const auto& metric : report.item_metrics) {
        std::vector<double> values;
        for (const auto& row : report.items) values.push_back(row.scores.at(metric));
        if (values.empty()) continue;
        double sum = 0.0;
        for (double v : values) sum += v;
        report.aggregates["mean_" + metric] = sum / static_cast<double>(values.size());
        report.summaries[metric] = chunked_summary(values, std::min(n_chunks, values.size()), shuffle_seed);
    }
    if (report.task == Task::QA) {
        for (const char* m : {"em_inflected", "em_lemmatized"}) {
            const auto it = report.aggregates.find(std::string("mean_") + m);
            if (it != report.aggregates.end()) report.aggregates[m] = it->second;
        }
        report.subsets.clear();
        for (const auto& row : report.items) {
            if (!row.in_context) continue;
            SubsetAggregate& s = report.subsets[*row.in_context ? "in_context" : "not_in_context"];
            ++s.count;
            for (const auto& m : report.item_metrics) s.means[m] += row.scores.at(m);
        }
        for (auto& [name, s] : report.subsets)
            for (auto& [m, v] : s.means) v /= static_cast<double>(s.count);
    }
    if (report.ner) report.aggregates["macro_f1"] = report.ner->macro_f1;
}

MetricReport run_experiment(const ExperimentConfig& config, ChatClient& client) {
    config.validate();
    const PromptRegistry prompts = PromptRegistry::load(config.prompts_dir);
    MetricReport report;
    report.task = config.task;
    report.config_text = config.serialize();
    report.config_values = config.values();
    spdlog::info("running {} on {}", to_string(config.task), config.dataset.string());
    switch (config.task) {
        case Task::QA: run_qa(config, client, prompts, report); break;
        case Task::NER: run_ner(config, client, prompts, report); break;
        case Task::MT: run_mt(config, client, prompts, report); break;
    }
    finalize_report(report, config.n_chunks,
                    config.shuffle_chunks ? std::optional<std::uint64_t>(config.seed) : std::nullopt);
    return report;
}

}  // namespace classeval
