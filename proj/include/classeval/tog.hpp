#ifndef CLASSEVAL_TOG_HPP
#define CLASSEVAL_TOG_HPP

// Think-on-Graph: extract question entities, then per depth fetch incident
// relations, let the model score and prune them, fetch the entities they
// reach, prune those, and ask whether the stored paths suffice; answer from
// the paths once they do or the depth limit is reached.
//
// With D fully explored depths the engine makes 2 + 3*D model calls, plus one
// retry per unusable pruning reply. A depth with no incident relations ends
// exploration before any call; one whose kept relations reach no new entity
// ends it after the relation-pruning call.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "classeval/datasets.hpp"
#include "classeval/kg.hpp"
#include "classeval/lemma.hpp"
#include "classeval/llmclient.hpp"
#include "classeval/prompts.hpp"

namespace classeval {

struct TogConfig {
    std::size_t sample_limit = 15;  // N
    std::size_t depth_limit = 1;    // D
    std::size_t width_limit = 3;    // W
    std::uint64_t seed = 0;
};

struct TogOptions {
    std::string model;
    double temperature = kDefaultTemperature;
    int max_tokens = kDefaultMaxTokens;
    Script dataset_script = Script::IAST;       // script of questions in the dataset
    Script prompt_script = Script::Devanagari;  // script the Sanskrit prompts are rendered in
};

struct TogStep {
    std::string prompt_id;
    std::size_t depth = 0;
    std::string raw_output;
    std::vector<std::pair<std::string, double>> scored;  // parsed pairs, pruning steps
    std::vector<std::string> candidates;                 // offered to the model
    std::vector<std::string> kept;
    int bit = -1;                                        // reason step
    bool parse_failed = false;
    bool fallback = false;  // kept set chosen in graph order after a failed retry
};

struct TogTrace {
    std::vector<TogStep> steps;
    std::vector<std::string> question_entities;    // canonical lemmas resolved in the graph
    std::vector<std::string> unresolved_entities;  // extracted but not in the graph
    std::vector<PathTriple> paths;
    std::size_t depths_explored = 0;
    bool sufficient = false;  // the reason step answered 1
    std::size_t llm_calls = 0;
    std::string answer;
};

nlohmann::json to_json(const TogTrace& trace);

/// "('a', 'REL', 'b'), ('b', 'REL2', 'c')"; lemmas rendered in `script`.
std::string format_paths(const std::vector<PathTriple>& paths, Script script);
/// "'a', 'b'".
std::string format_list(const std::vector<std::string>& items);

struct TogResult {
    std::string answer;
    TogTrace trace;
};

/// Shares the graph, client and templates; one question per call, safe to
/// call concurrently.
class TogEngine {
public:
    TogEngine(const KnowledgeGraph& kg, ChatClient& client, const PromptRegistry& prompts,
              const Lemmatizer& lemmatizer, TogOptions options);

    TogResult answer(const QaRecord& question, const TogConfig& config) const;

private:
    const KnowledgeGraph& kg_;
    ChatClient& client_;
    const PromptRegistry& prompts_;
    const Lemmatizer& lemmatizer_;
    TogOptions options_;
};

}  // namespace classeval

#endif  // CLASSEVAL_TOG_HPP
