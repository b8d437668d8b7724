#include "classeval/textproc.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <optional>
#include <stdexcept>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace classeval {

// ---------------------------------------------------------------------------
// UTF-8

namespace utf8 {

char32_t next(std::string_view s, std::size_t& pos) noexcept {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    const unsigned char b0 = byte(pos);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
        ++pos;
        return b0;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++pos;
        return 0xFFFD;
    }
    if (pos + len > s.size()) {
        pos = s.size();
        return 0xFFFD;
    }
    for (std::size_t i = 1; i < len; ++i) {
        const unsigned char b = byte(pos + i);
        if ((b & 0xC0) != 0x80) {
            pos += i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    pos += len;
    return cp;
}

void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::u32string decode(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    for (std::size_t pos = 0; pos < text.size();) out.push_back(next(text, pos));
    return out;
}

std::string encode(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) append(out, cp);
    return out;
}

}  // namespace utf8

// ---------------------------------------------------------------------------
// Script names

namespace {

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

Script parse_script(std::string_view name) {
    const std::string n = lower_ascii(name);
    if (n == "devanagari") return Script::Devanagari;
    if (n == "iast") return Script::IAST;
    if (n == "canonicalroman" || n == "canonical" || n == "slp1") return Script::CanonicalRoman;
    throw UnknownScript(std::string(name));
}

std::string_view to_string(Script script) noexcept {
    switch (script) {
        case Script::Devanagari: return "Devanagari";
        case Script::IAST: return "IAST";
        case Script::CanonicalRoman: return "CanonicalRoman";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Normalization

std::string nfc(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
    const icu::UnicodeString source =
        icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    if (normalizer->isNormalized(source, status) && U_SUCCESS(status)) return std::string(text);
    status = U_ZERO_ERROR;
    const icu::UnicodeString composed = normalizer->normalize(source, status);
    if (U_FAILURE(status)) throw Error("NFC normalization failed");
    std::string out;
    composed.toUTF8String(out);
    return out;
}

namespace {

bool is_danda(char32_t cp) { return cp == 0x0964 || cp == 0x0965 || cp == U'|'; }

bool is_strippable_punct(char32_t cp) {
    return cp != U'\'' && cp != U'-' && u_ispunct(static_cast<UChar32>(cp));
}

bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

}  // namespace

std::string normalize(std::string_view text, const NormalizeOptions& options) {
    const std::u32string composed = utf8::decode(nfc(text));
    std::string out;
    out.reserve(composed.size());
    bool pending_space = false;
    for (char32_t cp : composed) {
        if (options.strip_danda && is_danda(cp)) continue;
        if (options.strip_punctuation && is_strippable_punct(cp)) continue;
        if (is_space(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        utf8::append(out, cp);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transliteration
//
// Every codec decodes into a sequence of units: SLP1 phonemes (one ASCII char
// each), daṇḍa marks, or passthrough code points. Encoders never touch
// passthrough units.

namespace {

constexpr std::string_view kVowels = "aAiIuUfFxXeEoO";
constexpr std::string_view kConsonants = "kKgGNcCjJYwWqQRtTdDnpPbBmyrlvSzsh";
constexpr char kAvagraha = '\'';
constexpr char kDanda = '|';

bool is_vowel(char c) { return kVowels.find(c) != std::string_view::npos; }
bool is_consonant(char c) { return kConsonants.find(c) != std::string_view::npos; }
bool is_letter(char c) { return is_vowel(c) || is_consonant(c) || c == 'M' || c == 'H'; }

struct Unit {
    char phoneme = 0;       // 0 for passthrough
    char32_t passthrough = 0;
};

using Units = std::vector<Unit>;

Unit phoneme(char c) { return Unit{c, 0}; }
Unit pass(char32_t cp) { return Unit{0, cp}; }

// Byte offsets of each code point, for error reporting.
std::vector<std::size_t> byte_offsets(std::string_view text) {
    std::vector<std::size_t> offsets;
    for (std::size_t pos = 0; pos < text.size();) {
        offsets.push_back(pos);
        utf8::next(text, pos);
    }
    offsets.push_back(text.size());
    return offsets;
}

bool is_combining(char32_t cp) {
    const auto cat = u_charType(static_cast<UChar32>(cp));
    return cat == U_NON_SPACING_MARK || cat == U_COMBINING_SPACING_MARK ||
           cat == U_ENCLOSING_MARK;
}

// Avagraha only between two letters; elsewhere an apostrophe is a quote.
void push_apostrophe(Units& units, bool next_is_letter) {
    const bool after_letter =
        !units.empty() && units.back().phoneme != 0 && is_letter(units.back().phoneme);
    units.push_back(after_letter && next_is_letter ? phoneme(kAvagraha) : pass(U'\''));
}

// ---- IAST ------------------------------------------------------------------

struct IastEntry {
    std::u32string_view iast;
    char slp;
};

// Two-code-point sequences come first so the scan is greedy.
constexpr std::array<IastEntry, 13> kIastDigraphs{{
    {U"ai", 'E'},  {U"au", 'O'},  {U"kh", 'K'},       {U"gh", 'G'},  {U"ch", 'C'},
    {U"jh", 'J'},  {U"ṭh", 'W'},  {U"ḍh", 'Q'},       {U"th", 'T'},  {U"dh", 'D'},
    {U"ph", 'P'},  {U"bh", 'B'},  {U"m̐", '~'},
}};

constexpr std::array<IastEntry, 39> kIastSingles{{
    {U"a", 'a'}, {U"ā", 'A'}, {U"i", 'i'}, {U"ī", 'I'}, {U"u", 'u'}, {U"ū", 'U'},
    {U"ṛ", 'f'}, {U"ṝ", 'F'}, {U"ḷ", 'x'}, {U"ḹ", 'X'}, {U"e", 'e'}, {U"o", 'o'},
    {U"k", 'k'}, {U"g", 'g'}, {U"ṅ", 'N'}, {U"c", 'c'}, {U"j", 'j'}, {U"ñ", 'Y'},
    {U"ṭ", 'w'}, {U"ḍ", 'q'}, {U"ṇ", 'R'}, {U"t", 't'}, {U"d", 'd'}, {U"n", 'n'},
    {U"p", 'p'}, {U"b", 'b'}, {U"m", 'm'}, {U"y", 'y'}, {U"r", 'r'}, {U"l", 'l'},
    {U"v", 'v'}, {U"ś", 'S'}, {U"ṣ", 'z'}, {U"s", 's'}, {U"h", 'h'}, {U"ṃ", 'M'},
    {U"ṁ", 'M'}, {U"ḥ", 'H'}, {U"|", kDanda},
}};

std::optional<char> iast_single(char32_t cp) {
    for (const auto& e : kIastSingles) {
        if (e.iast[0] == cp) return e.slp;
    }
    return std::nullopt;
}

// IAST capitals are cosmetic; fold them when the lowercase form is a letter.
char32_t iast_fold(char32_t cp) {
    const auto lower = static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp)));
    if (lower != cp && iast_single(lower)) return lower;
    return cp;
}

bool iast_starts_letter(const std::u32string& s, std::size_t i) {
    if (i >= s.size()) return false;
    const auto p = iast_single(iast_fold(s[i]));
    return p && *p != kDanda;
}

Units decode_iast(std::string_view text) {
    const std::string composed = nfc(text);
    const std::u32string s = utf8::decode(composed);
    const auto offsets = byte_offsets(composed);
    Units units;
    units.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const char32_t c0 = iast_fold(s[i]);
        if (i + 1 < s.size()) {
            const char32_t c1 = iast_fold(s[i + 1]);
            bool matched = false;
            for (const auto& e : kIastDigraphs) {
                if (e.iast[0] == c0 && e.iast[1] == c1) {
                    units.push_back(phoneme(e.slp));
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }
        if (c0 == U'\'') {
            push_apostrophe(units, iast_starts_letter(s, i + 1));
            ++i;
            continue;
        }
        if (auto p = iast_single(c0)) {
            units.push_back(phoneme(*p));
            ++i;
            continue;
        }
        if (is_combining(c0) && (units.empty() || (units.back().phoneme == 0 &&
                                                   is_space(units.back().passthrough)))) {
            throw MalformedText(offsets[i], "combining mark without a base character");
        }
        units.push_back(pass(s[i]));
        ++i;
    }
    return units;
}

void encode_iast(const Units& units, std::string& out) {
    for (const Unit& u : units) {
        if (u.phoneme == 0) {
            utf8::append(out, u.passthrough);
            continue;
        }
        if (u.phoneme == kAvagraha || u.phoneme == kDanda) {
            out.push_back(u.phoneme);
            continue;
        }
        bool done = false;
        for (const auto& e : kIastDigraphs) {
            if (e.slp == u.phoneme) {
                out += utf8::encode(e.iast);
                done = true;
                break;
            }
        }
        if (done) continue;
        for (const auto& e : kIastSingles) {
            if (e.slp == u.phoneme) {
                out += utf8::encode(e.iast);
                break;
            }
        }
    }
}

// ---- Canonical (SLP1) ------------------------------------------------------

bool canonical_letter(char32_t cp) {
    return cp < 0x80 && (is_letter(static_cast<char>(cp)) || cp == U'~');
}

Units decode_canonical(std::string_view text) {
    const std::u32string s = utf8::decode(nfc(text));
    Units units;
    units.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char32_t cp = s[i];
        if (cp == U'\'') {
            push_apostrophe(units, i + 1 < s.size() && canonical_letter(s[i + 1]));
        } else if (cp == U'|') {
            units.push_back(phoneme(kDanda));
        } else if (canonical_letter(cp)) {
            units.push_back(phoneme(static_cast<char>(cp)));
        } else {
            units.push_back(pass(cp));
        }
    }
    return units;
}

void encode_canonical(const Units& units, std::string& out) {
    for (const Unit& u : units) {
        if (u.phoneme) out.push_back(u.phoneme);
        else utf8::append(out, u.passthrough);
    }
}

// ---- Devanagari --------------------------------------------------------------

constexpr char32_t kVirama = 0x094D;
constexpr char32_t kNukta = 0x093C;

struct DevEntry {
    char32_t glyph;
    char slp;
};

constexpr std::array<DevEntry, 14> kDevVowels{{
    {0x0905, 'a'}, {0x0906, 'A'}, {0x0907, 'i'}, {0x0908, 'I'}, {0x0909, 'u'},
    {0x090A, 'U'}, {0x090B, 'f'}, {0x0960, 'F'}, {0x090C, 'x'}, {0x0961, 'X'},
    {0x090F, 'e'}, {0x0910, 'E'}, {0x0913, 'o'}, {0x0914, 'O'},
}};

constexpr std::array<DevEntry, 13> kDevMatras{{
    {0x093E, 'A'}, {0x093F, 'i'}, {0x0940, 'I'}, {0x0941, 'u'}, {0x0942, 'U'},
    {0x0943, 'f'}, {0x0944, 'F'}, {0x0962, 'x'}, {0x0963, 'X'}, {0x0947, 'e'},
    {0x0948, 'E'}, {0x094B, 'o'}, {0x094C, 'O'},
}};

constexpr std::array<DevEntry, 33> kDevConsonants{{
    {0x0915, 'k'}, {0x0916, 'K'}, {0x0917, 'g'}, {0x0918, 'G'}, {0x0919, 'N'},
    {0x091A, 'c'}, {0x091B, 'C'}, {0x091C, 'j'}, {0x091D, 'J'}, {0x091E, 'Y'},
    {0x091F, 'w'}, {0x0920, 'W'}, {0x0921, 'q'}, {0x0922, 'Q'}, {0x0923, 'R'},
    {0x0924, 't'}, {0x0925, 'T'}, {0x0926, 'd'}, {0x0927, 'D'}, {0x0928, 'n'},
    {0x092A, 'p'}, {0x092B, 'P'}, {0x092C, 'b'}, {0x092D, 'B'}, {0x092E, 'm'},
    {0x092F, 'y'}, {0x0930, 'r'}, {0x0932, 'l'}, {0x0935, 'v'}, {0x0936, 'S'},
    {0x0937, 'z'}, {0x0938, 's'}, {0x0939, 'h'},
}};

constexpr std::array<DevEntry, 4> kDevSigns{{
    {0x0902, 'M'}, {0x0903, 'H'}, {0x0901, '~'}, {0x093D, kAvagraha},
}};

template <std::size_t N>
std::optional<char> lookup_glyph(const std::array<DevEntry, N>& table, char32_t cp) {
    for (const auto& e : table)
        if (e.glyph == cp) return e.slp;
    return std::nullopt;
}

template <std::size_t N>
char32_t lookup_phoneme(const std::array<DevEntry, N>& table, char slp) {
    for (const auto& e : table)
        if (e.slp == slp) return e.glyph;
    return 0;
}

Units decode_devanagari(std::string_view text) {
    const std::string composed = nfc(text);
    const std::u32string s = utf8::decode(composed);
    const auto offsets = byte_offsets(composed);
    Units units;
    units.reserve(s.size() * 2);
    for (std::size_t i = 0; i < s.size();) {
        const char32_t cp = s[i];
        if (auto c = lookup_glyph(kDevConsonants, cp)) {
            if (i + 1 < s.size() && s[i + 1] == kNukta) {
                // Nukta consonants are outside the Sanskrit alphabet: copy the
                // whole akshara through.
                units.push_back(pass(cp));
                units.push_back(pass(kNukta));
                i += 2;
                if (i < s.size() && (lookup_glyph(kDevMatras, s[i]) || s[i] == kVirama)) {
                    units.push_back(pass(s[i]));
                    ++i;
                }
                continue;
            }
            units.push_back(phoneme(*c));
            ++i;
            if (i < s.size()) {
                if (auto m = lookup_glyph(kDevMatras, s[i])) {
                    units.push_back(phoneme(*m));
                    ++i;
                    continue;
                }
                if (s[i] == kVirama) {
                    ++i;
                    continue;
                }
            }
            units.push_back(phoneme('a'));
            continue;
        }
        if (lookup_glyph(kDevMatras, cp) || cp == kVirama || cp == kNukta) {
            throw MalformedText(offsets[i], "vowel sign or virama without a consonant");
        }
        if (auto v = lookup_glyph(kDevVowels, cp)) {
            units.push_back(phoneme(*v));
        } else if (auto sign = lookup_glyph(kDevSigns, cp)) {
            units.push_back(phoneme(*sign));
        } else if (cp == 0x0964) {
            units.push_back(phoneme(kDanda));
        } else if (cp == 0x0965) {
            units.push_back(phoneme(kDanda));
            units.push_back(phoneme(kDanda));
        } else {
            units.push_back(pass(cp));
        }
        ++i;
    }
    return units;
}

void encode_devanagari(const Units& units, std::string& out) {
    for (std::size_t i = 0; i < units.size(); ++i) {
        const Unit& u = units[i];
        if (u.phoneme == 0) {
            utf8::append(out, u.passthrough);
            continue;
        }
        const char p = u.phoneme;
        if (is_consonant(p)) {
            utf8::append(out, lookup_phoneme(kDevConsonants, p));
            const bool vowel_follows = i + 1 < units.size() && units[i + 1].phoneme != 0 &&
                                       is_vowel(units[i + 1].phoneme);
            if (vowel_follows) {
                const char v = units[++i].phoneme;
                if (v != 'a') utf8::append(out, lookup_phoneme(kDevMatras, v));
            } else {
                utf8::append(out, kVirama);
            }
        } else if (is_vowel(p)) {
            utf8::append(out, lookup_phoneme(kDevVowels, p));
        } else if (p == kDanda) {
            if (i + 1 < units.size() && units[i + 1].phoneme == kDanda) {
                utf8::append(out, 0x0965);
                ++i;
            } else {
                utf8::append(out, 0x0964);
            }
        } else {
            utf8::append(out, lookup_phoneme(kDevSigns, p));
        }
    }
}

Units decode(std::string_view text, Script from) {
    switch (from) {
        case Script::Devanagari: return decode_devanagari(text);
        case Script::IAST: return decode_iast(text);
        case Script::CanonicalRoman: return decode_canonical(text);
    }
    throw UnknownScript(std::to_string(static_cast<int>(from)));
}

}  // namespace

std::string transliterate(std::string_view text, Script from, Script to) {
    if (from == to) return nfc(text);
    const Units units = decode(text, from);
    std::string out;
    out.reserve(text.size() * 2);
    switch (to) {
        case Script::Devanagari: encode_devanagari(units, out); break;
        case Script::IAST: encode_iast(units, out); break;
        case Script::CanonicalRoman: encode_canonical(units, out); break;
        default: throw UnknownScript(std::to_string(static_cast<int>(to)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tokenization

std::vector<Token> tokenize(std::string_view text, const TokenizeOptions& options) {
    std::vector<Token> tokens;
    const std::u32string s = utf8::decode(text);
    std::u32string current;
    const auto flush = [&] {
        if (options.strip_punctuation) {
            std::size_t b = 0;
            std::size_t e = current.size();
            while (b < e && u_ispunct(static_cast<UChar32>(current[b]))) ++b;
            while (e > b && u_ispunct(static_cast<UChar32>(current[e - 1]))) --e;
            current = current.substr(b, e - b);
        }
        if (!current.empty()) tokens.push_back(Token{utf8::encode(current), tokens.size()});
        current.clear();
    };
    for (char32_t cp : s) {
        if (is_space(cp)) flush();
        else current.push_back(cp);
    }
    flush();
    return tokens;
}

// ---------------------------------------------------------------------------
// Chunking

std::string chunk_id(const LineSpan& span) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "L%06zu-%06zu", span.first, span.last);
    return buf;
}

std::vector<DocumentChunk> chunk_corpus(std::span<const std::string> lines,
                                        std::size_t chunk_lines, std::size_t overlap_lines) {
    if (lines.empty()) throw EmptyCorpus();
    if (chunk_lines < 1) throw std::invalid_argument("chunk_lines must be >= 1");
    if (overlap_lines >= chunk_lines)
        throw std::invalid_argument("overlap_lines must be smaller than chunk_lines");

    const std::size_t step = chunk_lines - overlap_lines;
    std::vector<DocumentChunk> chunks;
    for (std::size_t start = 0;; start += step) {
        const LineSpan span{start, std::min(start + chunk_lines, lines.size()) - 1};
        DocumentChunk chunk;
        chunk.id = chunk_id(span);
        chunk.span = span;
        for (std::size_t i = span.first; i <= span.last; ++i) {
            if (i > span.first) chunk.raw_text.push_back('\n');
            chunk.raw_text += lines[i];
        }
        chunks.push_back(std::move(chunk));
        if (span.last + 1 == lines.size()) break;
    }
    return chunks;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lines.empty() && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        lines.push_back(std::move(line));
    }
    return lines;
}

}  // namespace classeval
