#!/usr/bin/env python3
"""Turn a directory of plain-text books into a pre-tokenized corpus.

Each blank-line separated paragraph becomes one document (one output line).
Words, numbers and individual punctuation marks become tokens, so the output
can be fed straight to `mblm vocab` / `mblm train`.

The test corpus under tests/data was produced from the Project Gutenberg
Shakespeare texts shipped in the `shakespeare` PyPI sdist (shksprdata/texts,
the *_gut.txt modern-spelling editions):

    pip download --no-deps --no-binary :all: shakespeare==0.6
    tar xzf shakespeare-0.6.tar.gz
    python3 tools/prepare_corpus.py shakespeare-0.6/shksprdata/texts \
        --glob '*_gut.txt' -o shakespeare.tok
"""

import argparse
import pathlib
import re
import sys

TOKEN = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)*|\d+|[^\w\s]")


def paragraphs(text):
    block = []
    for line in text.splitlines():
        if line.strip():
            block.append(line.strip())
        elif block:
            yield " ".join(block)
            block = []
    if block:
        yield " ".join(block)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("src", type=pathlib.Path)
    ap.add_argument("--glob", default="*.txt")
    ap.add_argument("-o", "--output", type=pathlib.Path, required=True)
    args = ap.parse_args()

    files = sorted(args.src.glob(args.glob))
    if not files:
        sys.exit(f"no files matching {args.glob} in {args.src}")

    ntok = ndoc = 0
    with args.output.open("w", encoding="utf-8") as out:
        for path in files:
            text = path.read_text(encoding="utf-8", errors="replace")
            for para in paragraphs(text):
                toks = TOKEN.findall(para)
                if not toks:
                    continue
                out.write(" ".join(toks))
                out.write("\n")
                ntok += len(toks)
                ndoc += 1
    print(f"{len(files)} files, {ndoc} documents, {ntok} tokens", file=sys.stderr)


if __name__ == "__main__":
    main()
