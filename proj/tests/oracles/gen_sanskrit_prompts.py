#!/usr/bin/env python3
"""Builds data/prompts/*.txt for Sanskrit templates from the IAST sources.

Literal text is converted IAST -> SLP1 with indic_transliteration; backtick
spans, placeholders and doubled braces are copied unchanged.

    python3 tests/oracles/gen_sanskrit_prompts.py tests/data/prompt_sources data/prompts
"""
import pathlib
import re
import sys

from indic_transliteration import sanscript

PROTECTED = re.compile(r"(`[^`]*`|\{\{|\}\}|\{[A-Z][A-Z ]*\})")


def convert_body(text):
    out = []
    for piece in PROTECTED.split(text):
        if not piece:
            continue
        if PROTECTED.fullmatch(piece):
            out.append(piece)
        else:
            out.append(sanscript.transliterate(piece, sanscript.IAST, sanscript.SLP1))
    return "".join(out)


def convert(src):
    lines = src.splitlines(keepends=True)
    out = []
    in_header = True
    for line in lines:
        if line.startswith("=== "):
            in_header = False
            out.append(line)
        elif in_header:
            out.append("script: slp1\n" if line.startswith("script:") else line)
        else:
            out.append(convert_body(line))
    return "".join(out)


def main():
    src_dir, dst_dir = map(pathlib.Path, sys.argv[1:3])
    for path in sorted(src_dir.glob("*.txt")):
        (dst_dir / path.name).write_text(convert(path.read_text(encoding="utf-8")), encoding="utf-8")
        print(path.name)


if __name__ == "__main__":
    main()
