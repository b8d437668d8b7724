"""Write tests/data/translit_iast_deva.tsv: 100 lines of pseudo-Sanskrit in
IAST with their Devanagari rendering from indic_transliteration.

Words are built from random syllables (vowel-initial or consonant clusters with
an inherent or explicit vowel, optional anusvara/visarga). Digits, quotes and
the om ligature are left out; the library and the oracle treat those
differently by design.
"""
import pathlib
import random

from indic_transliteration import sanscript

VOWELS = ["a", "ā", "i", "ī", "u", "ū", "ṛ", "ṝ", "e", "ai", "o", "au"]
CONSONANTS = ["k", "kh", "g", "gh", "ṅ", "c", "ch", "j", "jh", "ñ", "ṭ", "ṭh", "ḍ", "ḍh", "ṇ",
              "t", "th", "d", "dh", "n", "p", "ph", "b", "bh", "m", "y", "r", "l", "v",
              "ś", "ṣ", "s", "h"]
CLUSTERS = ["kṣ", "jñ", "tr", "dv", "sth", "ntr", "ry", "py", "sm", "nd", "mb", "ṣṭ", "str", "kr"]


def word(rng):
    out = []
    n = rng.randint(1, 4)
    for i in range(n):
        if i == 0 and rng.random() < 0.2:
            out.append(rng.choice(VOWELS))
        else:
            onset = rng.choice(CLUSTERS) if rng.random() < 0.2 else rng.choice(CONSONANTS)
            out.append(onset + rng.choice(VOWELS))
        if rng.random() < 0.08:
            out.append("ṃ")
    if rng.random() < 0.15:
        out.append("ḥ")
    elif rng.random() < 0.1:
        out.append(rng.choice(["t", "n", "m", "k"]))  # final consonant gets a virama
    return "".join(out)


def main():
    rng = random.Random(20240917)
    lines = []
    for _ in range(100):
        words = []
        while len(words) < rng.randint(3, 8):
            w = word(rng)
            if w != "oṃ":
                words.append(w)
        iast = " ".join(words)
        deva = sanscript.transliterate(iast, sanscript.IAST, sanscript.DEVANAGARI)
        lines.append(f"{iast}\t{deva}")
    path = pathlib.Path(__file__).resolve().parent.parent / "data" / "translit_iast_deva.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
