#include "doctest.h"

#include <random>

#include "classeval/textproc.hpp"

using namespace classeval;

TEST_CASE("transliteration of single words") {
    CHECK(transliterate("rāmaḥ", Script::IAST, Script::Devanagari) == "रामः");
    CHECK(transliterate("रामः", Script::Devanagari, Script::IAST) == "rāmaḥ");
    CHECK(to_canonical("rāmaḥ", Script::IAST) == "rAmaH");
    CHECK(transliterate("", Script::IAST, Script::Devanagari).empty());
    CHECK(transliterate("", Script::Devanagari, Script::CanonicalRoman).empty());
    CHECK(transliterate("haridrāmalakaṃ gṛhṇāti", Script::IAST, Script::IAST) == "haridrāmalakaṃ gṛhṇāti");
}

TEST_CASE("conjuncts, final virama and avagraha") {
    CHECK(transliterate("kṣatriya", Script::IAST, Script::Devanagari) == "क्षत्रिय");
    CHECK(transliterate("vāk", Script::IAST, Script::Devanagari) == "वाक्");
    CHECK(transliterate("so'ham", Script::IAST, Script::Devanagari) == "सोऽहम्");
    CHECK(transliterate("सोऽहम्", Script::Devanagari, Script::IAST) == "so'ham");
    // An apostrophe that does not sit between letters is a quote.
    CHECK(transliterate("'rāma'", Script::IAST, Script::Devanagari) == "'राम'");
}

TEST_CASE("characters outside the alphabet pass through") {
    CHECK(transliterate("B-LOC: rāma, 12", Script::IAST, Script::CanonicalRoman).find("12") != std::string::npos);
    CHECK(transliterate("abc", Script::CanonicalRoman, Script::CanonicalRoman) == "abc");
}

TEST_CASE("a dangling combining sign is malformed") {
    CHECK_THROWS_AS(transliterate("ा", Script::Devanagari, Script::IAST), MalformedText);
}

TEST_CASE("script names") {
    CHECK(parse_script("devanagari") == Script::Devanagari);
    CHECK(parse_script("IAST") == Script::IAST);
    CHECK(parse_script("slp1") == Script::CanonicalRoman);
    CHECK(parse_script("CanonicalRoman") == Script::CanonicalRoman);
    CHECK_THROWS_AS(parse_script("harvard-kyoto"), UnknownScript);
}

TEST_CASE("IAST round trip through both codecs") {
    const std::vector<std::string> letters = {"a", "ā", "i", "ī", "u", "ū", "ṛ", "e", "ai", "o", "au", "ṃ", "ḥ",
                                              "k", "kh", "g", "c", "j", "ṭ", "ḍ", "ṇ", "t", "d", "n", "p", "b",
                                              "m", "y", "r", "l", "v", "ś", "ṣ", "s", "h", " "};
    std::mt19937 rng(5);
    for (int i = 0; i < 200; ++i) {
        std::string s;
        for (int j = 0; j < 12; ++j) s += letters[rng() % letters.size()];
        s = normalize(s);
        if (s.empty()) continue;
        CHECK(transliterate(transliterate(s, Script::IAST, Script::Devanagari), Script::Devanagari, Script::IAST) == s);
    }
}

TEST_CASE("normalize") {
    CHECK(normalize("rāma  ḥ\n") == "rāma ḥ");
    CHECK(normalize("  a\t b ") == "a b");
    const std::string once = normalize("rāmaḥ   vanaṃ");
    CHECK(normalize(once) == once);
    CHECK(nfc("ra\xCC\x84ma") == "r\xC4\x81ma");
    CHECK(normalize("ra\xCC\x84ma") == "r\xC4\x81ma");
    CHECK(normalize("rāmo vanaṃ gacchati ।", {true, false}) == "rāmo vanaṃ gacchati");
    CHECK(normalize("rāmo, vanaṃ gacchati ॥", {true, true}) == "rāmo vanaṃ gacchati");
    CHECK(normalize("so'ham gala-grahe", {true, true}) == "so'ham gala-grahe");
}

TEST_CASE("tokenize") {
    const auto t = tokenize("a b c");
    REQUIRE(t.size() == 3);
    CHECK(t[0] == Token{"a", 0});
    CHECK(t[2] == Token{"c", 2});
    CHECK(tokenize("").empty());
    const auto p = tokenize("rāmaḥ, (sītā) !", {true});
    REQUIRE(p.size() == 2);
    CHECK(p[0].surface == "rāmaḥ");
    CHECK(p[1].surface == "sītā");
}

TEST_CASE("chunk_corpus") {
    std::vector<std::string> lines;
    for (int i = 0; i < 10; ++i) lines.push_back("line " + std::to_string(i));
    CHECK(chunk_corpus(lines, 2, 0).size() == 5);

    const auto overlapped = chunk_corpus(lines, 4, 2);
    REQUIRE(overlapped.size() == 4);
    CHECK(overlapped[0].span == LineSpan{0, 3});
    CHECK(overlapped[1].span == LineSpan{2, 5});
    CHECK(overlapped[2].span == LineSpan{4, 7});
    CHECK(overlapped[3].span == LineSpan{6, 9});
    CHECK(overlapped[1].raw_text == "line 2\nline 3\nline 4\nline 5");

    const std::vector<std::string> one = {"only"};
    const auto short_chunk = chunk_corpus(one, 4, 0);
    REQUIRE(short_chunk.size() == 1);
    CHECK(short_chunk[0].span == LineSpan{0, 0});

    CHECK_THROWS_AS(chunk_corpus(std::vector<std::string>{}, 2, 0), EmptyCorpus);
    CHECK_THROWS_AS(chunk_corpus(lines, 2, 2), std::invalid_argument);
    CHECK(chunk_id({2, 5}) < chunk_id({10, 11}));
}
