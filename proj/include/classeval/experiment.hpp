#ifndef CLASSEVAL_EXPERIMENT_HPP
#define CLASSEVAL_EXPERIMENT_HPP

// Runs one configured evaluation: load the dataset, render a prompt per item,
// call the model, parse, score, aggregate.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "classeval/config.hpp"
#include "classeval/lemma.hpp"
#include "classeval/llmclient.hpp"
#include "classeval/metrics.hpp"
#include "classeval/retrieval.hpp"

namespace classeval {

struct ItemRow {
    std::size_t index = 0;
    std::string id;
    std::string prompt_id;
    std::string input;  // question, sentence or source as given in the dataset
    std::vector<std::string> gold;
    std::string raw_output;
    std::string prediction;
    std::map<std::string, double> scores;
    std::vector<std::string> flags;  // llm_error, parse_failed, manual_review, ...
    std::optional<bool> in_context;  // QA: an acceptable answer is in the retrieved contexts
    bool requires_reasoning = false;
    std::string error;
    nlohmann::json extra = nlohmann::json::object();  // retrieved chunk ids, NER alignment
};

struct SubsetAggregate {
    std::size_t count = 0;
    std::map<std::string, double> means;
};

struct MetricReport {
    Task task = Task::QA;
    std::string config_text;
    std::map<std::string, std::string> config_values;
    std::vector<std::string> item_metrics;  // per-item score columns, display order
    std::vector<ItemRow> items;
    std::map<std::string, double> aggregates;
    std::map<std::string, ChunkedSummary> summaries;  // per item metric
    std::optional<NerScore> ner;
    std::map<std::string, SubsetAggregate> subsets;  // QA: in_context / not_in_context
    std::vector<nlohmann::json> traces;              // ToG, one per item
    std::size_t failed_items = 0;
};

std::unique_ptr<Lemmatizer> make_lemmatizer(const ExperimentConfig& config);
std::shared_ptr<ChatBackend> make_backend(const ExperimentConfig& config);
std::unique_ptr<ChatClient> make_client(const ExperimentConfig& config,
                                        std::shared_ptr<ChatBackend> backend = nullptr);

/// Chunks, lemmatizes and indexes the configured corpus.
RetrievalIndex build_index(const ExperimentConfig& config, const Lemmatizer& lemmatizer);

/// "1. first\n2. second"; chunk lines joined by spaces.
std::string format_contexts(const std::vector<std::string>& texts);

/// Throws ConfigError, SchemaError or IoError before any item runs; per-item
/// model and parse failures are recorded in the rows and score 0.
MetricReport run_experiment(const ExperimentConfig& config, ChatClient& client);

/// Aggregates, subsets and summaries from the item rows; run_experiment calls it.
void finalize_report(MetricReport& report, std::size_t n_chunks, std::optional<std::uint64_t> shuffle_seed);

}  // namespace classeval

#endif  // CLASSEVAL_EXPERIMENT_HPP
