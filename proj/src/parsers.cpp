#include "classeval/parsers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>

#include <unicode/uchar.h>

namespace classeval {

namespace {

bool is_quote(char32_t c) {
    switch (c) {
        case U'\'': case U'"': case U'`':
        case U'‘': case U'’': case U'“': case U'”':
            return true;
        default:
            return false;
    }
}

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

// Recursive-descent reader over one candidate block.
class DictReader {
public:
    DictReader(const std::u32string& text, std::size_t pos) : s_(text), i_(pos) {}

    std::optional<NerPrediction> read() {
        NerPrediction out;
        if (!dict(out)) return std::nullopt;
        return out;
    }

private:
    void ws() {
        while (i_ < s_.size() && is_space(s_[i_])) ++i_;
    }
    bool eat(char32_t c) {
        ws();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    bool peek(char32_t c) {
        ws();
        return i_ < s_.size() && s_[i_] == c;
    }

    // A quote closes only where the next non-space character ends the item.
    bool closes_at(std::size_t j) const {
        ++j;
        while (j < s_.size() && is_space(s_[j])) ++j;
        if (j == s_.size()) return true;
        const char32_t c = s_[j];
        return c == U',' || c == U']' || c == U':' || c == U'}';
    }

    std::optional<std::u32string> quoted() {
        ws();
        if (i_ >= s_.size() || !is_quote(s_[i_])) return std::nullopt;
        const std::size_t start = ++i_;
        for (std::size_t j = start; j < s_.size(); ++j) {
            if (is_quote(s_[j]) && closes_at(j)) {
                i_ = j + 1;
                return s_.substr(start, j - start);
            }
        }
        return std::nullopt;
    }

    bool dict(NerPrediction& out) {
        if (!eat(U'{')) return false;
        if (peek(U'{')) {
            if (!dict(out)) return false;
            return eat(U'}');
        }
        for (;;) {
            if (eat(U'}')) return true;
            auto key = quoted();
            if (!key || !eat(U':')) return false;
            std::vector<std::u32string> values;
            if (eat(U'[')) {
                for (;;) {
                    if (eat(U']')) break;
                    auto v = quoted();
                    if (!v) return false;
                    values.push_back(std::move(*v));
                    if (!eat(U',') && !peek(U']')) return false;
                }
            } else {
                auto v = quoted();
                if (!v) return false;
                values.push_back(std::move(*v));
            }
            add(out, *key, values);
            if (!eat(U',') && !peek(U'}')) return false;
        }
    }

    static void add(NerPrediction& out, const std::u32string& key, const std::vector<std::u32string>& values) {
        std::string tag;
        for (const auto& t : tokenize(utf8::encode(key))) tag += t.surface;
        std::vector<std::string> words;
        for (const auto& v : values)
            for (auto& t : tokenize(utf8::encode(v))) words.push_back(std::move(t.surface));
        if (tag.empty()) return;
        for (auto& [existing, list] : out.entries) {
            if (existing == tag) {
                list.insert(list.end(), words.begin(), words.end());
                return;
            }
        }
        out.entries.emplace_back(std::move(tag), std::move(words));
    }

    const std::u32string& s_;
    std::size_t i_;
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::string strip_quotes(std::u32string s) {
    while (!s.empty() && (is_quote(s.front()) || is_space(s.front()))) s.erase(s.begin());
    while (!s.empty() && (is_quote(s.back()) || is_space(s.back()))) s.pop_back();
    return utf8::encode(s);
}

std::optional<double> parse_number(std::string_view text) {
    const std::string s(trim(text));
    if (s.empty()) return std::nullopt;
    const char first = s[0];
    if (!(first == '-' || first == '+' || first == '.' || (first >= '0' && first <= '9'))) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

TaggedDictParse parse_tagged_dict(std::string_view raw) {
    const std::u32string text = utf8::decode(raw);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != U'{') continue;
        if (auto parsed = DictReader(text, i).read()) return TaggedDictParse{std::move(*parsed), false, {}};
    }
    TaggedDictParse out;
    out.failed = true;
    out.error = "no tag dictionary found in: " + std::string(raw.substr(0, 120));
    return out;
}

ScoredListParse parse_scored_list(std::string_view raw) {
    ScoredListParse out;
    const std::u32string text = utf8::decode(raw);
    std::size_t i = 0;
    while ((i = text.find(U'(', i)) != std::u32string::npos) {
        const std::size_t close = text.find(U')', i + 1);
        if (close == std::u32string::npos) break;
        // Another '(' before the ')' means this one is not a tuple opener.
        const std::size_t inner_open = text.find(U'(', i + 1);
        if (inner_open != std::u32string::npos && inner_open < close) {
            i = inner_open;
            continue;
        }
        const std::u32string body = text.substr(i + 1, close - i - 1);
        i = close + 1;
        const std::size_t comma = body.rfind(U',');
        if (comma == std::u32string::npos) continue;
        const auto score = parse_number(utf8::encode(body.substr(comma + 1)));
        std::string item = strip_quotes(body.substr(0, comma));
        if (!score || item.empty()) continue;
        const double clamped = std::clamp(*score, 0.0, 1.0);
        bool seen = false;
        for (auto& [existing, s] : out.items) {
            if (existing == item) {
                s = std::max(s, clamped);
                seen = true;
                break;
            }
        }
        if (!seen) out.items.emplace_back(std::move(item), clamped);
    }
    out.failed = out.items.empty();
    return out;
}

BinaryParse parse_binary(std::string_view raw) {
    const std::u32string text = utf8::decode(raw);
    const auto digit_value = [](char32_t c) -> int {
        if (c == U'0' || c == U'०') return 0;
        if (c == U'1' || c == U'१') return 1;
        return -1;
    };
    const auto glued = [](char32_t c) { return u_isalnum(static_cast<UChar32>(c)) != 0; };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const int v = digit_value(text[i]);
        if (v < 0) continue;
        if (i > 0 && (glued(text[i - 1]) || text[i - 1] == U'.')) continue;
        if (i + 1 < text.size()) {
            const char32_t n = text[i + 1];
            if (glued(n)) continue;
            if (n == U'.' && i + 2 < text.size() && u_isdigit(static_cast<UChar32>(text[i + 2]))) continue;
        }
        return BinaryParse{v, false};
    }
    return BinaryParse{0, true};
}

}  // namespace classeval
