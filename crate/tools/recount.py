#!/usr/bin/env python3
"""Brute-force recount of a manifest corpus.

Re-derives token, wordform and lemma counts plus a few profile numbers with
plain Python, so the Rust pipeline can be checked against frozen output.

    python3 tools/recount.py data/mini/manifest.tsv data/mini/lexicon.tsv data/mini/golden
    python3 tools/recount.py --queue-only data/loop/manifest.tsv data/loop/lexicon.tsv data/loop/golden
"""

import argparse
import os
import re
import unicodedata
from collections import Counter, defaultdict

NOTE_OPEN, NOTE_CLOSE = "⟦", "⟧"
APOS = "'’ʼ"
HYPH = "-‐‑"
MARKS = "̀-ͯ"
LETTER = r"[^\W\d_]"
JOINERS = re.escape(APOS + HYPH)
WORD_RE = re.compile(
    rf"{LETTER}(?:{LETTER}|[{MARKS}]|[{JOINERS}](?={LETTER}))*|\d+"
)

VARIANTS = [
    ["ся", "сь"], ["би", "б"], ["же", "ж"], ["в", "у"], ["і", "й"],
    ["з", "із", "зі", "зо"], ["під", "підо"], ["весь", "увесь", "ввесь"],
    ["всякий", "усякий"], ["щоб", "щоби"],
    ["тільки", "тілько"], ["скільки", "скілько"], ["ледве", "ледво"], ["трохи", "троха"],
]
HEAD = {m: g[0] for g in VARIANTS for m in g}
ENCLITICS = ("бо", "но", "таки", "то")
SHEDDING = {"noun", "noun_pl_tantum", "adjective", "pronoun", "numeral", "verb", "participle"}
LABELS = {
    "ім": "noun", "імен": "noun", "дієсл": "verb", "прикм": "adjective", "присл": "adverb",
    "займ": "pronoun", "числ": "numeral", "дієприкм": "participle", "прийм": "preposition",
    "спол": "conjunction", "част": "particle", "виг": "interjection",
}
VOWELS = set("аеиіоуяюєї")


def read_rows(path):
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n").rstrip("\r")
            if line.strip() and not line.startswith("#"):
                yield line.split("\t")


def read_manifest(path):
    base = os.path.dirname(path)
    docs = []
    for row in read_rows(path):
        if row[0] == "id":
            continue
        docs.append((row[0], os.path.join(base, row[1])))
    return docs


def read_lexicon(path):
    lex = defaultdict(list)
    for row in read_rows(path):
        row += [""] * (6 - len(row))
        key, lemma, pos, dis, lang, prio = (x.strip() for x in row[:6])
        cand = (lemma, pos, dis, lang)
        lex[key].append((cand, int(prio or 0)))
    return lex


def clean(raw):
    raw = raw.replace("\r\n", "\n").replace("\r", "\n")
    depth, kept = 0, []
    for c in raw:
        if c == NOTE_OPEN:
            depth += 1
        elif c == NOTE_CLOSE:
            depth -= 1
            assert depth >= 0
        elif depth == 0:
            kept.append(c)
    text = "".join(kept).replace("[", "").replace("]", "")
    out, tags = [], []
    pieces = re.split(r"\{([^{}]*)\}", text)
    for i, piece in enumerate(pieces):
        if i % 2 == 0:
            out.append(piece)
            continue
        so_far = "".join(out)
        m = re.search(rf"[\w{JOINERS}{MARKS}]+$", so_far)
        assert m, "tag must follow a word"
        tags.append((m.start(), m.end(), piece.strip()))
    return "".join(out), tags


def script_of(surface):
    kinds = set()
    for c in surface:
        if c.isdigit():
            kinds.add("digit")
        elif c.isalpha():
            name = unicodedata.name(c, "")
            kinds.add("cyrillic" if "CYRILLIC" in name else "latin" if "LATIN" in name else "other")
    return kinds.pop() if len(kinds) == 1 and "other" not in kinds else "mixed"


def tokenize(doc_id, text, tags):
    toks = []
    for m in WORD_RE.finditer(text):
        s, e = m.span()
        surface = "".join("'" if c in APOS else "-" if c in HYPH else c for c in m.group())
        norm = surface.lower()
        norm = "".join(c for c in norm if c not in "̀́")
        tag = next((t for a, b, t in tags if s < b <= e), None)
        toks.append(dict(doc=doc_id, off=s, surface=surface, norm=norm,
                         script=script_of(surface), tag=tag))
    return toks


def lookup(lex, form):
    return lex.get(HEAD.get(form, form)) or lex.get(form) or []


def unique(entries):
    if not entries:
        return None
    top = max(p for _, p in entries)
    best = [c for c, p in entries if p == top]
    return best[0] if len(best) == 1 else None


def lemmatize(tok, lex):
    """Returns (form_key, candidate or None)."""
    if tok["script"] == "digit":
        return tok["norm"], (tok["surface"], "numeral", "", "")
    norm = tok["norm"]
    key = HEAD.get(norm, norm)
    base = None
    if "-" in norm:
        b, _, suffix = norm.rpartition("-")
        if b and suffix in ENCLITICS:
            base = b
    if not lookup(lex, norm) and base and any(c[1] in SHEDDING for c, _ in lookup(lex, base)):
        key = HEAD.get(base, base)
    entries = lookup(lex, key)
    if tok["tag"]:
        tag = tok["tag"]
        hits = [c for c, _ in entries if c[2] == tag]
        if not hits:
            pos = LABELS.get(tag.rstrip("."))
            hits = [c for c, _ in entries if c[1] == pos]
        assert len(hits) >= 1, f"sense tag {tag} on {norm} matches nothing"
        return key, hits[0]
    cand = unique(entries)
    if cand:
        return key, cand
    if not entries and base:
        bc = unique(lookup(lex, base))
        if bc and bc[1] not in SHEDDING:
            lemma = norm if script_of(norm) == "latin" else norm.upper()
            return key, (lemma, bc[1], "", bc[3])
    return key, None


def syllables(form):
    return sum(1 for c in form if c in VOWELS)


def phonemes(form):
    n, i = 0, 0
    while i < len(form):
        c, prev = form[i], form[i - 1] if i else None
        if c == "ь" or c in APOS or c in HYPH:
            pass
        elif c in "щї":
            n += 2
        elif c == "д" and form[i + 1:i + 2] in ("з", "ж"):
            n += 1
            i += 1
        elif c in "яює":
            n += 2 if prev is None or prev in VOWELS or prev == "ь" or prev in APOS or prev in HYPH else 1
        else:
            n += 1
        i += 1
    return n


def write(path, header, rows):
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(header) + "\n")
        for r in rows:
            f.write("\t".join(str(x) for x in r) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("manifest")
    ap.add_argument("lexicon")
    ap.add_argument("out")
    ap.add_argument("--queue-only", action="store_true")
    args = ap.parse_args()

    lex = read_lexicon(args.lexicon)
    tokens = []
    for doc_id, path in read_manifest(args.manifest):
        with open(path, encoding="utf-8") as f:
            text, tags = clean(f.read())
        tokens.append(tokenize(doc_id, text, tags))

    forms, lemmas, scripts, queue = Counter(), Counter(), Counter(), []
    for doc in tokens:
        for tok in doc:
            key, cand = lemmatize(tok, lex)
            forms[HEAD.get(tok["norm"], tok["norm"])] += 1
            scripts[tok["script"]] += 1
            if cand is None:
                queue.append((tok["doc"], tok["off"], key))
            else:
                lemmas[cand] += 1

    os.makedirs(args.out, exist_ok=True)
    queue.sort()
    write(os.path.join(args.out, "queue.tsv"), ["doc_id", "offset", "form_key"], queue)
    if args.queue_only:
        return
    assert not queue, f"{len(queue)} unresolved tokens"

    n = sum(forms.values())
    assert n == sum(lemmas.values()) == sum(scripts.values())
    ranked = sorted(lemmas.values(), reverse=True)
    summary = [
        ("n", n),
        ("v_form", len(forms)),
        ("v_lemma", len(lemmas)),
        ("hapax_lemma", sum(1 for f in ranked if f == 1)),
        ("high10_lemma", sum(1 for f in ranked if f >= 10)),
        ("hapax_form", sum(1 for f in forms.values() if f == 1)),
        ("coverage_10", f"{sum(ranked[:10]) / n:.10f}"),
        ("coverage_100", f"{sum(ranked[:100]) / n:.10f}"),
    ] + [(f"tokens_{s}", scripts[s]) for s in ("cyrillic", "latin", "digit", "mixed")]
    write(os.path.join(args.out, "summary.tsv"), ["key", "value"], summary)
    write(os.path.join(args.out, "lemma_freqs.tsv"), ["lemma", "pos", "disamb", "language", "abs"],
          sorted((*c, f) for c, f in lemmas.items()))
    write(os.path.join(args.out, "form_freqs.tsv"), ["form", "abs"], sorted(forms.items()))
    write(os.path.join(args.out, "freq_profile.tsv"), ["rank", "abs"], enumerate(ranked, 1))

    syl, ph = Counter(), Counter()
    for form, count in forms.items():
        if script_of(form) == "cyrillic":
            syl[syllables(form)] += count
            ph[phonemes(form)] += count
    write(os.path.join(args.out, "syllables.tsv"), ["syllables", "tokens"], sorted(syl.items()))
    write(os.path.join(args.out, "phonemes.tsv"), ["phonemes", "tokens"], sorted(ph.items()))

    kwic = []
    for doc in tokens:
        for i, tok in enumerate(doc):
            if HEAD.get(tok["norm"], tok["norm"]) == "мати":
                left = " ".join(t["surface"] for t in doc[max(0, i - 5):i])
                right = " ".join(t["surface"] for t in doc[i + 1:i + 6])
                kwic.append((tok["doc"], tok["off"], left, tok["surface"], right))
    write(os.path.join(args.out, "kwic_maty.tsv"), ["doc_id", "offset", "left", "keyword", "right"], kwic)


if __name__ == "__main__":
    main()
