#include "classeval/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"

#include "classeval/digest.hpp"

#ifndef CLASSEVAL_DATA_DIR
#define CLASSEVAL_DATA_DIR "data"
#endif

namespace classeval {

std::string_view to_string(Task task) noexcept {
    switch (task) {
        case Task::NER: return "ner";
        case Task::MT: return "mt";
        case Task::QA: return "qa";
    }
    return "?";
}

std::string_view to_string(QaMode mode) noexcept {
    switch (mode) {
        case QaMode::Closed: return "closed";
        case QaMode::Rag: return "rag";
        case QaMode::Tog: return "tog";
    }
    return "?";
}

namespace {

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view expected) {
    throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value) + "' is not " +
                      std::string(expected));
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad(key, value, "a non-negative integer");
    return out;
}

int parse_int(std::string_view key, std::string_view value) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad(key, value, "an integer");
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    const std::string s(value);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) bad(key, value, "a number");
    return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad(key, value, "a boolean");
}

Script parse_script_value(std::string_view key, std::string_view value) {
    try {
        return parse_script(value);
    } catch (const UnknownScript&) {
        bad(key, value, "a script (Devanagari, IAST, SLP1)");
    }
}

std::filesystem::path parse_path(std::string_view value, const std::filesystem::path& base) {
    if (value.empty()) return {};
    std::filesystem::path p{std::string(value)};
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.lexically_normal();
}

std::string real_text(double v) { return nlohmann::json(v).dump(); }

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value, const std::filesystem::path& base) {
    const auto path = [&] { return parse_path(value, base); };
    if (key == "task") {
        if (value == "ner") task = Task::NER;
        else if (value == "mt") task = Task::MT;
        else if (value == "qa") task = Task::QA;
        else bad(key, value, "one of ner, mt, qa");
    } else if (key == "dataset") dataset = path();
    else if (key == "dataset_script") dataset_script = parse_script_value(key, value);
    else if (key == "language") language = std::string(value);
    else if (key == "model") model = std::string(value);
    else if (key == "prompt_language") prompt_language = std::string(value);
    else if (key == "script") script = parse_script_value(key, value);
    else if (key == "qa_mode") {
        if (value == "closed") qa_mode = QaMode::Closed;
        else if (value == "rag") qa_mode = QaMode::Rag;
        else if (value == "tog") qa_mode = QaMode::Tog;
        else bad(key, value, "one of closed, rag, tog");
    } else if (key == "retriever") {
        if (value != "bm25" && value != "avg_embedding") bad(key, value, "bm25 or avg_embedding");
        retriever = std::string(value);
    } else if (key == "embeddings") embeddings = path();
    else if (key == "embeddings_script") embeddings_script = parse_script_value(key, value);
    else if (key == "corpus") corpus = path();
    else if (key == "corpus_script") corpus_script = parse_script_value(key, value);
    else if (key == "chunk_lines") chunk_lines = parse_unsigned<std::size_t>(key, value);
    else if (key == "chunk_overlap") chunk_overlap = parse_unsigned<std::size_t>(key, value);
    else if (key == "k") k = parse_unsigned<std::size_t>(key, value);
    else if (key == "index") index = path();
    else if (key == "bm25.k1") bm25.k1 = parse_real(key, value);
    else if (key == "bm25.b") bm25.b = parse_real(key, value);
    else if (key == "tog.sample_limit") tog.sample_limit = parse_unsigned<std::size_t>(key, value);
    else if (key == "tog.depth_limit") tog.depth_limit = parse_unsigned<std::size_t>(key, value);
    else if (key == "tog.width_limit") tog.width_limit = parse_unsigned<std::size_t>(key, value);
    else if (key == "kg") kg = path();
    else if (key == "kg_script") kg_script = parse_script_value(key, value);
    else if (key == "lemmatizer") {
        if (value != "identity" && value != "lexicon" && value != "external")
            bad(key, value, "one of identity, lexicon, external");
        lemmatizer = std::string(value);
    } else if (key == "lexicon") lexicon = path();
    else if (key == "lexicon_script") lexicon_script = parse_script_value(key, value);
    else if (key == "lemmatizer_command") lemmatizer_command = std::string(value);
    else if (key == "lemmatizer_script") lemmatizer_script = parse_script_value(key, value);
    else if (key == "lemmatizer_timeout_s") lemmatizer_timeout_s = parse_int(key, value);
    else if (key == "cache_dir") cache_dir = path();
    else if (key == "seed") seed = parse_unsigned<std::uint64_t>(key, value);
    else if (key == "prompts_dir") prompts_dir = path();
    else if (key == "tagsets_dir") tagsets_dir = path();
    else if (key == "temperature") temperature = parse_real(key, value);
    else if (key == "max_tokens") max_tokens = parse_int(key, value);
    else if (key == "n_chunks") n_chunks = parse_unsigned<std::size_t>(key, value);
    else if (key == "shuffle_chunks") shuffle_chunks = parse_bool(key, value);
    else if (key == "bleu_x100") bleu_x100 = parse_bool(key, value);
    else if (key == "workers") workers = parse_unsigned<std::size_t>(key, value);
    else if (key == "llm.backend") {
        if (value != "http" && value != "mock") bad(key, value, "http or mock");
        llm.backend = std::string(value);
    } else if (key == "llm.base_url") llm.base_url = std::string(value);
    else if (key == "llm.path") llm.path = std::string(value);
    else if (key == "llm.api_key_env") llm.api_key_env = std::string(value);
    else if (key == "llm.timeout_s") llm.timeout_s = parse_int(key, value);
    else if (key == "llm.requests_per_minute") llm.requests_per_minute = parse_real(key, value);
    else if (key == "llm.max_in_flight") llm.max_in_flight = parse_unsigned<std::size_t>(key, value);
    else if (key == "llm.max_retries") llm.max_retries = parse_int(key, value);
    else if (key == "llm.backoff_ms") llm.backoff_ms = parse_int(key, value);
    else if (key == "llm.mock_script") llm.mock_script = path();
    else if (key == "llm.replay_only") llm.replay_only = parse_bool(key, value);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::map<std::string, std::string> ExperimentConfig::values() const {
    const auto s = [](Script x) { return std::string(to_string(x)); };
    const auto b = [](bool x) { return std::string(x ? "true" : "false"); };
    return {
        {"task", std::string(to_string(task))},
        {"dataset", dataset.string()},
        {"dataset_script", s(dataset_script)},
        {"language", language},
        {"model", model},
        {"prompt_language", prompt_language},
        {"script", s(script)},
        {"qa_mode", std::string(to_string(qa_mode))},
        {"retriever", retriever},
        {"embeddings", embeddings.string()},
        {"embeddings_script", s(embeddings_script)},
        {"corpus", corpus.string()},
        {"corpus_script", s(corpus_script)},
        {"chunk_lines", std::to_string(chunk_lines)},
        {"chunk_overlap", std::to_string(chunk_overlap)},
        {"k", std::to_string(k)},
        {"index", index.string()},
        {"bm25.k1", real_text(bm25.k1)},
        {"bm25.b", real_text(bm25.b)},
        {"tog.sample_limit", std::to_string(tog.sample_limit)},
        {"tog.depth_limit", std::to_string(tog.depth_limit)},
        {"tog.width_limit", std::to_string(tog.width_limit)},
        {"kg", kg.string()},
        {"kg_script", s(kg_script)},
        {"lemmatizer", lemmatizer},
        {"lexicon", lexicon.string()},
        {"lexicon_script", s(lexicon_script)},
        {"lemmatizer_command", lemmatizer_command},
        {"lemmatizer_script", s(lemmatizer_script)},
        {"lemmatizer_timeout_s", std::to_string(lemmatizer_timeout_s)},
        {"cache_dir", cache_dir.string()},
        {"seed", std::to_string(seed)},
        {"prompts_dir", prompts_dir.string()},
        {"tagsets_dir", tagsets_dir.string()},
        {"temperature", real_text(temperature)},
        {"max_tokens", std::to_string(max_tokens)},
        {"n_chunks", std::to_string(n_chunks)},
        {"shuffle_chunks", b(shuffle_chunks)},
        {"bleu_x100", b(bleu_x100)},
        {"workers", std::to_string(workers)},
        {"llm.backend", llm.backend},
        {"llm.base_url", llm.base_url},
        {"llm.path", llm.path},
        {"llm.api_key_env", llm.api_key_env},
        {"llm.timeout_s", std::to_string(llm.timeout_s)},
        {"llm.requests_per_minute", real_text(llm.requests_per_minute)},
        {"llm.max_in_flight", std::to_string(llm.max_in_flight)},
        {"llm.max_retries", std::to_string(llm.max_retries)},
        {"llm.backoff_ms", std::to_string(llm.backoff_ms)},
        {"llm.mock_script", llm.mock_script.string()},
        {"llm.replay_only", b(llm.replay_only)},
    };
}

std::string ExperimentConfig::serialize() const {
    std::string out;
    for (const auto& [k, v] : values()) out += k + " = " + v + "\n";
    return out;
}

void ExperimentConfig::validate() const {
    const auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(!dataset.empty(), "dataset is not set");
    require(!model.empty(), "model is not set");
    require(!prompts_dir.empty(), "prompts_dir is not set");
    static const std::set<std::string> kLanguages = {"sa", "la", "grc"};
    require(kLanguages.count(language) > 0, "language must be one of sa, la, grc");
    require(prompt_language == "en" || prompt_language == language,
            "prompt_language must be en or the dataset language (" + language + ")");
    require(script == Script::Devanagari || script == Script::IAST, "script must be Devanagari or IAST");
    require(n_chunks >= 1, "n_chunks must be >= 1");
    require(workers >= 1, "workers must be >= 1");
    require(llm.max_in_flight >= 1, "llm.max_in_flight must be >= 1");
    require(max_tokens >= 1, "max_tokens must be >= 1");
    if (task == Task::NER) require(!tagsets_dir.empty(), "tagsets_dir is not set");
    if (task == Task::QA) {
        require(language == "sa", "QA is defined for Sanskrit (language = sa)");
        if (qa_mode == QaMode::Rag) {
            require(k >= 1, "rag mode needs k >= 1 (use qa_mode = closed for no contexts)");
            require(!corpus.empty() || !index.empty(), "rag mode needs a corpus or an index");
            require(bm25.k1 >= 0.0 && bm25.b >= 0.0 && bm25.b <= 1.0, "bm25 needs k1 >= 0 and b in [0, 1]");
            if (retriever == "avg_embedding") require(!embeddings.empty(), "avg_embedding needs embeddings");
        }
        if (qa_mode == QaMode::Tog) {
            require(!kg.empty(), "tog mode needs kg");
            require(tog.width_limit >= 1 && tog.sample_limit >= 1, "tog limits must be >= 1");
        }
    }
    if (lemmatizer == "lexicon") require(!lexicon.empty(), "lemmatizer = lexicon needs lexicon");
    if (lemmatizer == "external") require(!lemmatizer_command.empty(), "lemmatizer = external needs lemmatizer_command");
    if (llm.backend == "mock") require(!llm.mock_script.empty(), "llm.backend = mock needs llm.mock_script");
}

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("CLASSEVAL_DATA_DIR"); env && *env) return env;
    return CLASSEVAL_DATA_DIR;
}

ExperimentConfig default_config() {
    ExperimentConfig c;
    const auto data = data_dir();
    c.prompts_dir = data / "prompts";
    c.tagsets_dir = data / "tagsets";
    return c;
}

namespace {

void apply(ExperimentConfig& config, const std::filesystem::path& path, std::set<std::filesystem::path>& stack) {
    const auto canonical = std::filesystem::weakly_canonical(path);
    if (!stack.insert(canonical).second) throw ConfigError("config include cycle at " + path.string());
    std::string content;
    try {
        content = read_file(path.string());
    } catch (const IoError&) {
        throw ConfigError("cannot read config " + path.string());
    }
    const auto base = path.parent_path();
    std::istringstream in(content);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.rfind("include", 0) == 0 && line.size() > 7 && (line[7] == ' ' || line[7] == '\t')) {
            apply(config, parse_path(trim(line.substr(7)), base), stack);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base);
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    stack.erase(canonical);
}

}  // namespace

void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path) {
    std::set<std::filesystem::path> stack;
    apply(config, path, stack);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    ExperimentConfig c = default_config();
    apply_config_file(c, path);
    return c;
}

}  // namespace classeval
