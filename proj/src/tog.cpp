#include "classeval/tog.hpp"

#include <algorithm>
#include <set>

#include "classeval/digest.hpp"
#include "classeval/parsers.hpp"

namespace classeval {

using nlohmann::json;

namespace {

// A failed pruning reply is asked again once with some sampling, since an
// identical request would be answered from the cache.
constexpr double kRetryTemperature = 0.7;

std::uint64_t stable_hash(std::string_view s) { return std::stoull(sha256_hex(s).substr(0, 16), nullptr, 16); }

}  // namespace

std::string format_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += "'" + items[i] + "'";
    }
    return out;
}

std::string format_paths(const std::vector<PathTriple>& paths, Script script) {
    std::string out;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (i) out += ", ";
        out += "('" + from_canonical(paths[i].src_lemma, script) + "', '" + paths[i].relation + "', '" +
               from_canonical(paths[i].dst_lemma, script) + "')";
    }
    return out;
}

json to_json(const TogTrace& trace) {
    json steps = json::array();
    for (const auto& s : trace.steps) {
        json scored = json::array();
        for (const auto& [item, score] : s.scored) scored.push_back(json::array({item, score}));
        steps.push_back({{"prompt_id", s.prompt_id},
                         {"depth", s.depth},
                         {"raw_output", s.raw_output},
                         {"scored", std::move(scored)},
                         {"candidates", s.candidates},
                         {"kept", s.kept},
                         {"bit", s.bit},
                         {"parse_failed", s.parse_failed},
                         {"fallback", s.fallback}});
    }
    json paths = json::array();
    for (const auto& p : trace.paths) paths.push_back({{"src", p.src_lemma}, {"relation", p.relation}, {"dst", p.dst_lemma}, {"depth", p.depth}});
    return json{{"steps", std::move(steps)},
                {"question_entities", trace.question_entities},
                {"unresolved_entities", trace.unresolved_entities},
                {"paths", std::move(paths)},
                {"depths_explored", trace.depths_explored},
                {"sufficient", trace.sufficient},
                {"llm_calls", trace.llm_calls},
                {"answer", trace.answer}};
}

TogEngine::TogEngine(const KnowledgeGraph& kg, ChatClient& client, const PromptRegistry& prompts,
                     const Lemmatizer& lemmatizer, TogOptions options)
    : kg_(kg), client_(client), prompts_(prompts), lemmatizer_(lemmatizer), options_(std::move(options)) {
    for (const char* id : {"tog.extract_entities", "tog.relation_prune", "tog.entity_prune", "tog.reason", "tog.answer"})
        prompts_.get(id);
}

namespace {

struct Run {
    const KnowledgeGraph& kg;
    ChatClient& client;
    const PromptRegistry& prompts;
    const Lemmatizer& lemmatizer;
    const TogOptions& options;
    Binding base;
    TogTrace trace;

    std::string call(const std::string& id, const Binding& extra, bool retry) {
        Binding binding = base;
        for (const auto& [k, v] : extra) binding[k] = v;
        ChatRequest request;
        request.model = options.model;
        request.messages = prompts.render(id, binding, options.prompt_script);
        request.temperature = retry ? std::max(options.temperature, kRetryTemperature) : options.temperature;
        request.max_tokens = options.max_tokens;
        ++trace.llm_calls;
        return client.complete(request).text;
    }

    std::string canonical_or_empty(std::string_view text) const {
        try {
            return normalize(to_canonical(normalize(text), options.prompt_script));
        } catch (const MalformedText&) {
            return {};
        }
    }

    LemmaSequence lemmas_of(std::string_view text) const {
        try {
            return lemmatizer.lemmatize(prepare_for_lemmatizer(text, options.prompt_script));
        } catch (const MalformedText&) {
            return {};
        }
    }

    // Graph nodes named by a model-produced string: the string itself, its
    // lemmatized form, then each of its lemmas.
    std::vector<std::size_t> resolve(std::string_view item) const {
        std::vector<std::size_t> out;
        const auto add = [&](std::optional<std::size_t> n) {
            if (n && std::find(out.begin(), out.end(), *n) == out.end()) out.push_back(*n);
        };
        const std::string direct = canonical_or_empty(item);
        if (!direct.empty()) add(kg.find_lemma(direct));
        if (!out.empty()) return out;
        const LemmaSequence lemmas = lemmas_of(item);
        std::string joined;
        for (const auto& l : lemmas) joined += (joined.empty() ? "" : " ") + l;
        add(kg.find_lemma(joined));
        if (!out.empty()) return out;
        for (const auto& l : lemmas) add(kg.find_lemma(l));
        return out;
    }

    // Scores candidates from the model's list; top `width` by score, ties by
    // rank. One retry, then the first `width` candidates by rank.
    template <typename Match>
    std::vector<std::size_t> prune(const std::string& id, const Binding& extra, std::size_t depth,
                                   const std::vector<std::string>& shown, const std::vector<std::size_t>& rank,
                                   std::size_t width, Match match) {
        TogStep step;
        step.prompt_id = id;
        step.depth = depth;
        step.candidates = shown;
        std::vector<std::size_t> kept;
        for (int attempt = 0; attempt < 2 && kept.empty(); ++attempt) {
            step.raw_output = call(id, extra, attempt > 0);
            const ScoredListParse parsed = parse_scored_list(step.raw_output);
            step.scored = parsed.items;
            std::vector<std::pair<double, std::size_t>> hits;
            std::set<std::size_t> used;
            for (const auto& [item, score] : parsed.items) {
                const auto c = match(item);
                if (c && used.insert(*c).second) hits.emplace_back(score, *c);
            }
            if (hits.empty()) {
                step.parse_failed = true;
                if (attempt == 0) {
                    trace.steps.push_back(step);
                    step.parse_failed = false;
                }
                continue;
            }
            std::stable_sort(hits.begin(), hits.end(), [&](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return rank[a.second] < rank[b.second];
            });
            for (std::size_t i = 0; i < hits.size() && i < width; ++i) kept.push_back(hits[i].second);
        }
        if (kept.empty()) {
            std::vector<std::size_t> order(shown.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
            order.resize(std::min(width, order.size()));
            kept = order;
            step.fallback = true;
        }
        for (std::size_t k : kept) step.kept.push_back(shown[k]);
        trace.steps.push_back(std::move(step));
        return kept;
    }
};

}  // namespace

TogResult TogEngine::answer(const QaRecord& question, const TogConfig& config) const {
    if (config.width_limit == 0) throw std::invalid_argument("ToG width limit must be >= 1");
    const Script out_script = options_.prompt_script;
    Run run{kg_, client_, prompts_, lemmatizer_, options_, {}, {}};
    run.base["QUESTION"] = transliterate(question.question, options_.dataset_script, out_script);
    run.base["CHOICES"] = transliterate(choices_text(question), options_.dataset_script, out_script);
    run.base["TOPIC"] = transliterate(topic_label(question.topic), Script::IAST, out_script);
    Rng rng(config.seed ^ stable_hash(question.id));
    TogTrace& trace = run.trace;

    // Entities named in the question.
    std::vector<std::size_t> entities;
    {
        TogStep step;
        step.prompt_id = "tog.extract_entities";
        ScoredListParse parsed;
        for (int attempt = 0; attempt < 2; ++attempt) {
            step.raw_output = run.call(step.prompt_id, {}, attempt > 0);
            parsed = parse_scored_list(step.raw_output);
            if (!parsed.failed) break;
            step.parse_failed = true;
            if (attempt == 0) {
                trace.steps.push_back(step);
                step.parse_failed = false;
            }
        }
        step.scored = parsed.items;
        std::vector<std::string> sources;
        if (parsed.failed) {
            step.fallback = true;
            for (auto& t : tokenize(run.base["QUESTION"], {true})) sources.push_back(std::move(t.surface));
        } else {
            for (const auto& [item, score] : parsed.items) sources.push_back(item);
        }
        for (const auto& item : sources) {
            const auto nodes = run.resolve(item);
            if (nodes.empty() && !parsed.failed) trace.unresolved_entities.push_back(item);
            for (std::size_t n : nodes)
                if (std::find(entities.begin(), entities.end(), n) == entities.end()) entities.push_back(n);
        }
        for (std::size_t n : entities) {
            trace.question_entities.push_back(kg_.nodes()[n].lemma);
            step.kept.push_back(from_canonical(kg_.nodes()[n].lemma, out_script));
        }
        trace.steps.push_back(std::move(step));
    }

    std::vector<bool> visited(kg_.nodes().size(), false);
    for (std::size_t n : entities) visited[n] = true;

    for (std::size_t d = 0; d < config.depth_limit && !entities.empty(); ++d) {
        const std::vector<std::string> relations = fetch_relations(kg_, entities, config.sample_limit, rng);
        if (relations.empty()) break;
        std::vector<std::size_t> rel_rank;
        for (const auto& r : relations) rel_rank.push_back(*kg_.relation_rank(r));
        const auto rel_kept_idx = run.prune(
            "tog.relation_prune", {{"RELATIONS", format_list(relations)}}, d, relations, rel_rank,
            config.width_limit, [&](const std::string& item) -> std::optional<std::size_t> {
                const std::string key = normalize(item);
                for (std::size_t i = 0; i < relations.size(); ++i)
                    if (relations[i] == key) return i;
                return std::nullopt;
            });
        std::vector<std::string> kept_relations;
        for (std::size_t i : rel_kept_idx) kept_relations.push_back(relations[i]);

        FetchedEntities fetched = fetch_entities(kg_, entities, kept_relations, visited, d + 1, config.sample_limit, rng);
        if (fetched.entities.empty()) break;

        std::vector<std::string> shown;
        for (std::size_t n : fetched.entities) shown.push_back(from_canonical(kg_.nodes()[n].lemma, out_script));
        const auto ent_kept_idx = run.prune(
            "tog.entity_prune",
            {{"RELATIONS", format_list(kept_relations)}, {"ENTITIES", format_list(shown)}}, d, shown,
            fetched.entities, config.width_limit, [&](const std::string& item) -> std::optional<std::size_t> {
                const std::string key = run.canonical_or_empty(item);
                for (std::size_t i = 0; i < fetched.entities.size(); ++i)
                    if (kg_.nodes()[fetched.entities[i]].lemma == key) return i;
                for (std::size_t n : run.resolve(item))
                    for (std::size_t i = 0; i < fetched.entities.size(); ++i)
                        if (fetched.entities[i] == n) return i;
                return std::nullopt;
            });

        std::vector<bool> keep(fetched.entities.size(), false);
        for (std::size_t i : ent_kept_idx) keep[i] = true;
        entities.clear();
        for (std::size_t i : ent_kept_idx) {
            entities.push_back(fetched.entities[i]);
            visited[fetched.entities[i]] = true;
        }
        for (std::size_t i = 0; i < fetched.paths.size(); ++i)
            if (keep[i]) trace.paths.push_back(fetched.paths[i]);

        TogStep reason;
        reason.prompt_id = "tog.reason";
        reason.depth = d;
        reason.raw_output = run.call(reason.prompt_id, {{"PATHS", format_paths(trace.paths, out_script)}}, false);
        const BinaryParse bit = parse_binary(reason.raw_output);
        reason.bit = bit.value;
        reason.parse_failed = bit.failed;
        trace.steps.push_back(std::move(reason));
        trace.depths_explored = d + 1;
        if (bit.value == 1) {
            trace.sufficient = true;
            break;
        }
    }

    TogStep final_step;
    final_step.prompt_id = "tog.answer";
    final_step.depth = trace.depths_explored;
    final_step.raw_output = run.call(final_step.prompt_id, {{"PATHS", format_paths(trace.paths, out_script)}}, false);
    trace.answer = normalize(final_step.raw_output);
    trace.steps.push_back(std::move(final_step));
    return TogResult{trace.answer, std::move(trace)};
}

}  // namespace classeval
