#ifndef CLASSEVAL_TESTS_FIXTURES_HPP
#define CLASSEVAL_TESTS_FIXTURES_HPP

// Shared fixtures for the unit and acceptance suites.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"

#include "classeval/config.hpp"

namespace fixtures {

inline const std::filesystem::path kTestData = CLASSEVAL_TEST_DATA;
inline const std::filesystem::path kDataDir = CLASSEVAL_DATA_DIR;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() /
                ("classeval-" + name + "-" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------
// Twelve-node Rāmāyaṇa graph (IAST). Node order: daśaratha, rāma, lakṣmaṇa,
// bharata, śatrughna, kausalyā, sītā, janaka, ayodhyā, hanumān, rāvaṇa, laṅkā.

inline const char* kKg12 =
    "# twelve-node fixture\n"
    "daśaratha\tIS_FATHER_OF\trāma\n"
    "daśaratha\tIS_FATHER_OF\tlakṣmaṇa\n"
    "daśaratha\tIS_FATHER_OF\tbharata\n"
    "daśaratha\tIS_FATHER_OF\tśatrughna\n"
    "kausalyā\tIS_MOTHER_OF\trāma\n"
    "rāma\tIS_HUSBAND_OF\tsītā\n"
    "janaka\tIS_FATHER_OF\tsītā\n"
    "daśaratha\tRULES\tayodhyā\n"
    "hanumān\tIS_DEVOTEE_OF\trāma\n"
    "rāvaṇa\tABDUCTS\tsītā\n"
    "rāvaṇa\tRULES\tlaṅkā\n"
    "rāma\tKILLS\trāvaṇa\n"
    "daśaratha\tIS_HUSBAND_OF\tkausalyā\n";

/// Model replies for one ToG question over kKg12, in call order.
inline std::vector<std::string> tog_script() {
    return {
        "('daśaratha', 1.0)",
        "('IS_FATHER_OF', 0.9), ('RULES', 0.1)",
        "('rāma', 0.9), ('bharata', 0.5), ('lakṣmaṇa', 0.5), ('ayodhyā', 0.05), ('śatrughna', 0.4)",
        "0",
        "rāmaḥ",
    };
}

// ---------------------------------------------------------------------------
// Lexicon covering the compound example and a few inflected forms (IAST).

inline const char* kLexicon =
    "# surface\tlemmas\n"
    "haridrāmalakaṃ\tharidrā āmalaka\n"
    "gṛhṇāti\tgṛh\n"
    "rāmaḥ\trāma\n"
    "rāmasya\trāma\n"
    "vanaṃ\tvana\n"
    "gacchati\tgam\n";

// ---------------------------------------------------------------------------
// Synthetic RAG fixture: 100 questions, each answer in exactly one chunk.

inline std::string syllable(std::size_t i) {
    static const char* kC = "kgtdpbmnrlvsh";
    static const char* kV = "aiu";
    return std::string(1, kC[(i / 3) % 13]) + kV[i % 3];
}

/// Two syllables naming item i (39 * 39 distinct).
inline std::string stem(std::size_t i) { return syllable(i / 39) + syllable(i % 39); }

inline std::string rag_key(std::size_t i) { return "pa" + stem(i) + "ka"; }
inline std::string rag_answer(std::size_t i) { return "ra" + stem(i) + "ma"; }
inline std::string rag_question(std::size_t i) { return rag_key(i) + " kutra vasati"; }

struct RagFixture {
    std::filesystem::path corpus;
    std::filesystem::path dataset;            // no context annotations
    std::filesystem::path annotated_dataset;  // alternating true / false annotations
    std::filesystem::path mock;
    std::size_t items = 100;
};

inline RagFixture write_rag_fixture(const std::filesystem::path& dir, std::size_t items = 100) {
    RagFixture f;
    f.items = items;
    f.corpus = dir / "corpus.txt";
    f.dataset = dir / "qa.jsonl";
    f.annotated_dataset = dir / "qa_annotated.jsonl";
    f.mock = dir / "mock.json";
    std::string corpus, qa, annotated;
    nlohmann::json answers = nlohmann::json::array();
    for (std::size_t i = 0; i < items; ++i) {
        corpus += rag_key(i) + " nagaram gacchati\n" + rag_answer(i) + " tatra vasati\n";
        nlohmann::json rec = {{"id", "q" + std::to_string(i)},
                              {"topic", "Ramayana"},
                              {"category", "Locations"},
                              {"question", rag_question(i)},
                              {"acceptable_answers", {rag_answer(i)}}};
        qa += rec.dump() + "\n";
        rec["answer_in_retrieved_context"] = i % 2 == 0;
        annotated += rec.dump() + "\n";
        answers.push_back({{"when", rag_question(i)}, {"answer", rag_answer(i)}});
    }
    write_text(f.corpus, corpus);
    write_text(f.dataset, qa);
    write_text(f.annotated_dataset, annotated);
    const nlohmann::json mock = {
        {"comment", "answers only when the gold answer is in the contexts section"},
        {"answer_echo", {{"answers", answers}, {"sections", nlohmann::json::array({nlohmann::json::array({"contexts:", "question:"})})}}},
        {"default", "na jānāmi"}};
    write_text(f.mock, mock.dump(1) + "\n");
    return f;
}

/// QA config for the RAG fixture; `mode` is closed or rag.
inline classeval::ExperimentConfig rag_config(const RagFixture& f, const std::string& mode,
                                              const std::filesystem::path& cache_dir = {}) {
    classeval::ExperimentConfig c = classeval::default_config();
    c.prompts_dir = kDataDir / "prompts";
    c.tagsets_dir = kDataDir / "tagsets";
    c.set("task", "qa");
    c.dataset = f.dataset;
    c.model = "mock-model";
    c.set("script", "IAST");
    c.set("qa_mode", mode);
    c.corpus = f.corpus;
    c.k = 4;
    c.cache_dir = cache_dir;
    c.llm.backend = "mock";
    c.llm.mock_script = f.mock;
    return c;
}

}  // namespace fixtures

#endif  // CLASSEVAL_TESTS_FIXTURES_HPP
