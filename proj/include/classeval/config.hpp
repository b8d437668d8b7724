#ifndef CLASSEVAL_CONFIG_HPP
#define CLASSEVAL_CONFIG_HPP

// Experiment configuration: flat "key = value" text. '#' starts a comment,
// "include <path>" pulls in another file (relative to the including one),
// later assignments override earlier ones. Relative paths in path-valued keys
// resolve against the file that sets them.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "classeval/retrieval.hpp"
#include "classeval/textproc.hpp"
#include "classeval/tog.hpp"

namespace classeval {

enum class Task { NER, MT, QA };
enum class QaMode { Closed, Rag, Tog };

std::string_view to_string(Task task) noexcept;
std::string_view to_string(QaMode mode) noexcept;

struct LlmSettings {
    std::string backend = "http";  // http | mock
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_s = 120;
    double requests_per_minute = 0.0;
    std::size_t max_in_flight = 4;
    int max_retries = 3;
    int backoff_ms = 500;
    std::filesystem::path mock_script;
    bool replay_only = false;
};

struct ExperimentConfig {
    Task task = Task::QA;
    std::filesystem::path dataset;
    Script dataset_script = Script::IAST;  // Sanskrit datasets only
    std::string language = "sa";           // sa, la, grc
    std::string model;
    std::string prompt_language = "en";  // en or the dataset language
    Script script = Script::Devanagari;  // how Sanskrit is shown to the model
    QaMode qa_mode = QaMode::Closed;

    std::string retriever = "bm25";  // bm25 | avg_embedding
    std::filesystem::path embeddings;
    Script embeddings_script = Script::IAST;
    std::filesystem::path corpus;
    Script corpus_script = Script::IAST;
    std::size_t chunk_lines = kDefaultChunkLines;
    std::size_t chunk_overlap = kDefaultChunkOverlap;
    std::size_t k = 4;
    std::filesystem::path index;
    Bm25Params bm25;

    TogConfig tog;
    std::filesystem::path kg;
    Script kg_script = Script::IAST;

    std::string lemmatizer = "identity";  // identity | lexicon | external
    std::filesystem::path lexicon;
    Script lexicon_script = Script::IAST;
    std::string lemmatizer_command;
    Script lemmatizer_script = Script::IAST;
    int lemmatizer_timeout_s = 30;

    std::filesystem::path cache_dir;
    std::uint64_t seed = 0;
    std::filesystem::path prompts_dir;
    std::filesystem::path tagsets_dir;
    double temperature = kDefaultTemperature;
    int max_tokens = kDefaultMaxTokens;
    std::size_t n_chunks = 10;
    bool shuffle_chunks = false;
    bool bleu_x100 = false;  // report.md shows BLEU on a 0..100 scale
    std::size_t workers = 1;
    LlmSettings llm;

    /// Throws ConfigError for an unknown key or a malformed value.
    void set(std::string_view key, std::string_view value,
             const std::filesystem::path& base_dir = std::filesystem::path());
    /// Throws ConfigError for inconsistent settings (e.g. rag with k = 0).
    void validate() const;
    /// Every key in sorted order, one "key = value" per line.
    std::string serialize() const;
    std::map<std::string, std::string> values() const;
};

/// The bundled data/ tree; CLASSEVAL_DATA_DIR in the environment overrides it.
std::filesystem::path data_dir();

/// Defaults for data directories point at data_dir().
ExperimentConfig default_config();

ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies the file's assignments on top of `config`.
void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path);

}  // namespace classeval

#endif  // CLASSEVAL_CONFIG_HPP
