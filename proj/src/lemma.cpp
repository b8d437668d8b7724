#include "classeval/lemma.hpp"

#include <algorithm>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>

#include "classeval/digest.hpp"
#include "classeval/subprocess.hpp"

namespace classeval {

namespace {

LemmaSequence split_words(std::string_view text) {
    LemmaSequence out;
    for (auto& token : tokenize(text)) out.push_back(std::move(token.surface));
    return out;
}

}  // namespace

LemmaSequence IdentityLemmatizer::lemmatize(std::string_view canonical_sentence) const {
    return split_words(canonical_sentence);
}

// ---------------------------------------------------------------------------
// Lexicon

LexiconLemmatizer::LexiconLemmatizer(const std::filesystem::path& path, Script file_script) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LexiconMissing(path.string());
    std::ostringstream whole;
    whole << in.rdbuf();
    const std::string content = whole.str();
    label_ = path.filename().string() + "@" + sha256_hex(content).substr(0, 16);

    std::istringstream lines(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(lineno, "expected surface<TAB>lemmas");
        const std::string surface = normalize(to_canonical(line.substr(0, tab), file_script));
        LemmaSequence lemmas = split_words(to_canonical(line.substr(tab + 1), file_script));
        if (surface.empty() || surface.find(' ') != std::string::npos)
            throw ParseError(lineno, "surface must be a single non-empty word");
        if (lemmas.empty()) throw ParseError(lineno, "empty lemma list");
        longest_surface_ = std::max(longest_surface_, surface.size());
        entries_[surface] = std::move(lemmas);
    }
}

LexiconLemmatizer::LexiconLemmatizer(std::unordered_map<std::string, LemmaSequence> entries,
                                     std::string label)
    : entries_(std::move(entries)), label_(std::move(label)) {
    for (const auto& [surface, _] : entries_)
        longest_surface_ = std::max(longest_surface_, surface.size());
}

void LexiconLemmatizer::segment(const std::string& token, LemmaSequence& out) const {
    if (const auto it = entries_.find(token); it != entries_.end()) {
        out.insert(out.end(), it->second.begin(), it->second.end());
        return;
    }
    // Canonical script is ASCII plus passthrough bytes, so byte prefixes are
    // phoneme prefixes for in-alphabet text.
    LemmaSequence pieces;
    std::size_t pos = 0;
    while (pos < token.size()) {
        const std::size_t max_len = std::min(longest_surface_, token.size() - pos);
        bool found = false;
        for (std::size_t len = max_len; len > 0; --len) {
            const auto it = entries_.find(token.substr(pos, len));
            if (it != entries_.end()) {
                pieces.insert(pieces.end(), it->second.begin(), it->second.end());
                pos += len;
                found = true;
                break;
            }
        }
        if (!found) {
            out.push_back(token);
            return;
        }
    }
    out.insert(out.end(), pieces.begin(), pieces.end());
}

LemmaSequence LexiconLemmatizer::lemmatize(std::string_view canonical_sentence) const {
    LemmaSequence out;
    for (const auto& token : tokenize(canonical_sentence)) segment(token.surface, out);
    return out;
}

// ---------------------------------------------------------------------------
// External process

struct ExternalLemmatizer::Pool {
    std::vector<std::unique_ptr<ChildProcess>> children;
    std::vector<bool> busy;
    std::mutex mutex;
    std::condition_variable freed;
};

ExternalLemmatizer::ExternalLemmatizer(ExternalLemmatizerOptions options)
    : options_(std::move(options)), pool_(std::make_unique<Pool>()) {
    if (options_.command.empty()) throw ConfigError("external lemmatizer command is empty");
    if (options_.pool_size == 0) options_.pool_size = 1;
    pool_->children.resize(options_.pool_size);
    pool_->busy.assign(options_.pool_size, false);
}

ExternalLemmatizer::~ExternalLemmatizer() = default;

LemmaSequence ExternalLemmatizer::lemmatize(std::string_view canonical_sentence) const {
    const std::string request =
        normalize(from_canonical(canonical_sentence, options_.io_script));
    if (request.empty()) return {};

    std::size_t slot = 0;
    {
        std::unique_lock lock(pool_->mutex);
        pool_->freed.wait(lock, [&] {
            return std::find(pool_->busy.begin(), pool_->busy.end(), false) != pool_->busy.end();
        });
        slot = static_cast<std::size_t>(
            std::find(pool_->busy.begin(), pool_->busy.end(), false) - pool_->busy.begin());
        pool_->busy[slot] = true;
    }
    struct Release {
        Pool& pool;
        std::size_t slot;
        ~Release() {
            {
                std::lock_guard lock(pool.mutex);
                pool.busy[slot] = false;
            }
            pool.freed.notify_one();
        }
    } release{*pool_, slot};

    auto& child = pool_->children[slot];
    try {
        if (!child) child = std::make_unique<ChildProcess>(options_.command);
    } catch (const Error& e) {
        throw ExternalLemmatizerUnavailable(std::string("cannot start external lemmatizer: ") +
                                            e.what());
    }

    const auto fail = [&](const std::string& why) -> ExternalLemmatizerUnavailable {
        std::string message = "external lemmatizer '" + options_.command + "' " + why;
        if (auto status = child->exit_status()) message += " (exit status " + std::to_string(*status) + ")";
        child.reset();
        return ExternalLemmatizerUnavailable(message);
    };

    if (!child->write_line(request)) throw fail("closed its input");
    auto response = child->read_line(options_.timeout);
    if (!response) {
        if (child->timed_out())
            throw fail("timed out after " + std::to_string(options_.timeout.count()) + " ms");
        throw fail("closed its output");
    }
    return split_words(to_canonical(*response, options_.io_script));
}

// ---------------------------------------------------------------------------
// Scoring

LemmaScore lemma_f1(const LemmaSequence& predicted, const LemmaSequence& gold) {
    if (predicted.empty() && gold.empty()) return {1.0, 1.0, 1.0};
    if (predicted.empty() || gold.empty()) return {0.0, 0.0, 0.0};

    std::unordered_map<std::string_view, long> remaining;
    for (const auto& g : gold) ++remaining[g];
    long overlap = 0;
    for (const auto& p : predicted) {
        auto it = remaining.find(p);
        if (it != remaining.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    LemmaScore score;
    score.precision = static_cast<double>(overlap) / static_cast<double>(predicted.size());
    score.recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    if (score.precision + score.recall > 0.0)
        score.f1 = 2.0 * score.precision * score.recall / (score.precision + score.recall);
    return score;
}

// ---------------------------------------------------------------------------
// Corpus

std::string prepare_for_lemmatizer(std::string_view text, Script script) {
    NormalizeOptions options;
    options.strip_danda = true;
    options.strip_punctuation = true;
    return normalize(to_canonical(normalize(text, options), script));
}

std::string corpus_digest(const std::vector<DocumentChunk>& chunks) {
    std::string material;
    for (const auto& chunk : chunks) {
        material += chunk.id;
        material.push_back('\x1f');
        material += chunk.raw_text;
        material.push_back('\x1e');
    }
    return sha256_hex(material);
}

namespace {

constexpr std::string_view kLemmaCacheMagic = "#classeval-lemmas v1";

bool load_cached_lemmas(const std::filesystem::path& file, std::vector<DocumentChunk>& chunks) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line) || line != kLemmaCacheMagic) return false;
    std::vector<LemmaSequence> lemmas;
    lemmas.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (!std::getline(in, line)) return false;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.compare(0, tab, chunks[i].id) != 0) return false;
        lemmas.push_back(split_words(std::string_view(line).substr(tab + 1)));
    }
    if (std::getline(in, line)) return false;
    for (std::size_t i = 0; i < chunks.size(); ++i) chunks[i].lemmas = std::move(lemmas[i]);
    return true;
}

void store_cached_lemmas(const std::filesystem::path& file, const std::vector<DocumentChunk>& chunks) {
    std::string content(kLemmaCacheMagic);
    content.push_back('\n');
    for (const auto& chunk : chunks) {
        content += chunk.id;
        content.push_back('\t');
        for (std::size_t i = 0; i < chunk.lemmas.size(); ++i) {
            if (i) content.push_back(' ');
            content += chunk.lemmas[i];
        }
        content.push_back('\n');
    }
    write_file_atomic(file.string(), content);
}

}  // namespace

std::vector<DocumentChunk> lemmatize_corpus(std::vector<DocumentChunk> chunks,
                                            const Lemmatizer& lemmatizer, Script corpus_script,
                                            const std::optional<std::filesystem::path>& cache_dir,
                                            LemmatizeCorpusStats* stats) {
    LemmatizeCorpusStats local;
    std::filesystem::path cache_file;
    if (cache_dir) {
        std::filesystem::create_directories(*cache_dir);
        const std::string key = sha256_hex(corpus_digest(chunks) + "\n" + lemmatizer.kind() +
                                           "\n" + std::string(to_string(corpus_script)));
        cache_file = *cache_dir / (key + ".lemmas");
        if (load_cached_lemmas(cache_file, chunks)) {
            local.cache_hit = true;
            if (stats) *stats = local;
            return chunks;
        }
    }
    for (auto& chunk : chunks) {
        try {
            chunk.lemmas = lemmatizer.lemmatize(prepare_for_lemmatizer(chunk.raw_text, corpus_script));
        } catch (const ExternalLemmatizerUnavailable& e) {
            throw ExternalLemmatizerUnavailable("lemmatizing chunk " + chunk.id + ": " + e.what());
        } catch (const Error& e) {
            throw Error("lemmatizing chunk " + chunk.id + ": " + e.what());
        }
        ++local.lemmatizer_calls;
    }
    if (cache_dir) store_cached_lemmas(cache_file, chunks);
    if (stats) *stats = local;
    return chunks;
}

}  // namespace classeval
