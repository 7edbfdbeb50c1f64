#!/usr/bin/env python3
"""Reference WordPiece trainer used to freeze expected vocabularies.

Usage: wordpiece_ref.py CORPUS VOCAB_SIZE [MIN_PAIR_FREQ]

Prints one token per line. Scores are exact fractions
count(ab) / (count(a) * count(b)); ties go to the lexicographically
smallest (a, b).
"""
import sys
import unicodedata
from collections import Counter
from fractions import Fraction

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
PREFIX = "##"


def normalize(text):
    return unicodedata.normalize("NFKC", text).lower()


def merge_name(a, b):
    return a + (b[len(PREFIX):] if b.startswith(PREFIX) else b)


def train(lines, size, min_freq):
    counts = Counter()
    for line in lines:
        counts.update(normalize(line).split())
    words = []
    alphabet = set()
    for w in sorted(counts):
        if len(w) > 100:
            continue
        parts = [w[0]] + [PREFIX + ch for ch in w[1:]]
        alphabet.update(parts)
        words.append([parts, counts[w]])
    vocab = list(SPECIALS)
    for a in sorted(alphabet, key=lambda s: s.encode("utf-8")):
        if a not in vocab:
            vocab.append(a)
    while len(vocab) < size:
        sym = Counter()
        pairs = Counter()
        for parts, c in words:
            for i, p in enumerate(parts):
                sym[p] += c
                if i + 1 < len(parts):
                    pairs[(p, parts[i + 1])] += c
        best = None
        for (a, b), c in pairs.items():
            if c < min_freq:
                continue
            key = (-Fraction(c, sym[a] * sym[b]), a.encode("utf-8"), b.encode("utf-8"))
            if best is None or key < best[0]:
                best = (key, a, b)
        if best is None:
            break
        _, a, b = best
        merged = merge_name(a, b)
        for entry in words:
            parts = entry[0]
            out = []
            i = 0
            while i < len(parts):
                if i + 1 < len(parts) and parts[i] == a and parts[i + 1] == b:
                    out.append(merged)
                    i += 2
                else:
                    out.append(parts[i])
                    i += 1
            entry[0] = out
        if merged not in vocab:
            vocab.append(merged)
    return vocab


def main():
    path, size = sys.argv[1], int(sys.argv[2])
    min_freq = int(sys.argv[3]) if len(sys.argv) > 3 else 2
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    for tok in train(lines, size, min_freq):
        print(tok)


if __name__ == "__main__":
    main()
