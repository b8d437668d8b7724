"""Freeze BLEU reference values from sacrebleu into tests/data/bleu_cases.json.

corpus_bleu: sacrebleu corpus BLEU, no tokenization (inputs are plain
lower-case words), no smoothing, rescaled to 0..1.
sentence_bleu: sacrebleu sentence BLEU with floor smoothing 0.1 (a zero match
count becomes 0.1) and effective order (orders with no candidate n-grams are
left out).

NLTK is not used for the frozen values: it counts a sentence shorter than n as
one n-gram, which lowers corpus precision for mixed-length corpora.
"""
import json
import pathlib

from sacrebleu.metrics import BLEU

CASES = [
    ("identity", ["the king went to the forest with his brother"],
     [["the king went to the forest with his brother"]]),
    ("empty candidate", [""], [["the king went to the forest"]]),
    ("one word off", ["the king went to the woods with his brother"],
     [["the king went to the forest with his brother"]]),
    ("brevity", ["the king went to the forest"],
     [["the king went to the forest with his brother and wife"]]),
    ("longer candidate", ["the old king went slowly to the deep forest with his brother"],
     [["the king went to the forest with his brother"]]),
    ("two references", ["rama went to the forest with sita"],
     [["rama went to the forest with sita and lakshmana", "rama went to the forest with sita"]]),
    ("closest reference shorter on tie", ["a b c d e f"],
     [["a b c d e", "a b c d e f g"]]),
    ("clipping", ["the the the the the the the"],
     [["the cat is on the mat", "there is a cat on the mat"]]),
    ("reordered", ["forest the to went king the"],
     [["the king went to the forest"]]),
    ("corpus of three",
     ["the sage spoke to the king", "he gave the bow to rama", "the city rejoiced greatly"],
     [["the sage spoke to the king"], ["he handed the bow to rama"], ["the whole city rejoiced"]]),
    ("corpus with a short sentence",
     ["yes", "the monkey leapt across the ocean to lanka"],
     [["yes indeed"], ["the monkey leapt over the ocean to lanka"]]),
    ("no overlap four words", ["alpha beta gamma delta"], [["one two three four"]]),
    ("partial bigram", ["the cow gives milk every morning"],
     [["every morning the cow gives milk"]]),
    ("repeated references", ["fire is hot and bright"],
     [["fire is hot and bright", "fire is hot and bright"]]),
    ("long sentence",
     ["in the beginning the sage valmiki asked narada who is the most virtuous man in the world"],
     [["at the beginning valmiki the sage asked narada who in this world is the most virtuous man"]]),
    ("corpus mixed lengths",
     ["one two three four five", "six seven eight", "nine ten eleven twelve thirteen fourteen"],
     [["one two three four five six"], ["six seven eight nine"], ["nine ten eleven twelve"]]),
    ("three references",
     ["the medicine cures fever quickly"],
     [["this medicine cures fever", "the medicine quickly cures a fever", "fever is cured quickly by the medicine"]]),
    ("half match", ["a b c d x y z w"], [["a b c d e f g h"]]),
    ("corpus identical items", ["a b c d e", "f g h i j"], [["a b c d e"], ["f g h i j"]]),
    ("unicode words", ["rāma went to ayodhyā with sītā"], [["rāma returned to ayodhyā with sītā"]]),
]


def main():
    corpus = BLEU(tokenize="none", smooth_method="none")
    sentence = BLEU(tokenize="none", smooth_method="floor", smooth_value=0.1, effective_order=True)
    out = []
    for name, cands, refs in CASES:
        width = max(len(r) for r in refs)
        streams = [[r[i] if i < len(r) else None for r in refs] for i in range(width)]
        case = {"name": name, "candidates": cands, "references": refs,
                "corpus_bleu": corpus.corpus_score(cands, streams).score / 100.0}
        sent = []
        for c, rs in zip(cands, refs):
            sent.append(sentence.sentence_score(c, rs).score / 100.0 if c else None)
        case["sentence_bleu"] = sent
        out.append(case)
    path = pathlib.Path(__file__).resolve().parent.parent / "data" / "bleu_cases.json"
    path.write_text(json.dumps(out, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
