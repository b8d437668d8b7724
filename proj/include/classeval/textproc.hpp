#ifndef CLASSEVAL_TEXTPROC_HPP
#define CLASSEVAL_TEXTPROC_HPP

// Script handling, normalization, tokenization and corpus chunking.
//
// Sanskrit text is converted through SLP1, a one-character-per-phoneme ASCII
// romanization, which is the library's canonical internal script. Devanagari
// and IAST are codecs around it. Characters outside a script's alphabet pass
// through unchanged.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "classeval/error.hpp"

namespace classeval {

enum class Script { Devanagari, IAST, CanonicalRoman };

/// Accepts "Devanagari", "IAST", "CanonicalRoman" (also "SLP1"), case-insensitive.
Script parse_script(std::string_view name);
std::string_view to_string(Script script) noexcept;

struct NormalizeOptions {
    bool strip_danda = false;        // । ॥ and their ASCII stand-ins | ||
    bool strip_punctuation = false;  // Unicode P* except apostrophe and hyphen
};

/// NFC composition, whitespace runs collapsed to one space, trimmed. Idempotent.
std::string normalize(std::string_view text, const NormalizeOptions& options = {});

/// NFC composition only.
std::string nfc(std::string_view text);

/// Throws MalformedText for a dangling combining sign.
std::string transliterate(std::string_view text, Script from, Script to);

/// Shorthands for the pivot conversions.
inline std::string to_canonical(std::string_view text, Script from) {
    return transliterate(text, from, Script::CanonicalRoman);
}
inline std::string from_canonical(std::string_view text, Script to) {
    return transliterate(text, Script::CanonicalRoman, to);
}

struct Token {
    std::string surface;
    std::size_t index = 0;

    bool operator==(const Token&) const = default;
};

struct TokenizeOptions {
    /// Strip leading/trailing punctuation from each token; tokens that become
    /// empty are dropped.
    bool strip_punctuation = false;
};

std::vector<Token> tokenize(std::string_view text, const TokenizeOptions& options = {});

/// Inclusive, 0-based line range.
struct LineSpan {
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t size() const noexcept { return last - first + 1; }
    bool operator==(const LineSpan&) const = default;
};

struct DocumentChunk {
    std::string id;
    LineSpan span;
    std::string raw_text;             // lines joined with '\n', original script
    std::vector<std::string> lemmas;  // canonical script; empty until lemmatized
};

inline constexpr std::size_t kDefaultChunkLines = 2;
inline constexpr std::size_t kDefaultChunkOverlap = 0;

/// Chunk id for a span, zero-padded so lexicographic order equals line order.
std::string chunk_id(const LineSpan& span);

/// Throws EmptyCorpus for no lines and std::invalid_argument for bad sizes.
std::vector<DocumentChunk> chunk_corpus(std::span<const std::string> lines,
                                        std::size_t chunk_lines = kDefaultChunkLines,
                                        std::size_t overlap_lines = kDefaultChunkOverlap);

/// Reads a UTF-8 corpus, one verse-line per line. A trailing '\r' is dropped.
std::vector<std::string> read_lines(const std::string& path);

/// UTF-8 helpers shared by the codecs and parsers.
namespace utf8 {

/// Decodes the code point at `pos` and advances it. Invalid bytes decode as U+FFFD.
char32_t next(std::string_view text, std::size_t& pos) noexcept;
void append(std::string& out, char32_t cp);
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);

}  // namespace utf8

}  // namespace classeval

#endif  // CLASSEVAL_TEXTPROC_HPP
