"""Rebuild the lexicon files under data/ and the bundled POS index.

Sources (both fetched from package registries):

* ``sentiword`` (npm) ships SentiWordNet 3.0 flattened to one JSON row per
  synset term.  Rows are regrouped by synset and written back out in the
  six-column SentiWordNet TSV layout.  Sense numbers come from WordNet's
  ``index.sense``; glosses are not part of the npm data and are left empty.
* ``pattern3`` (PyPI) ships the WordNet 3.0 dict files and an adjective
  polarity lexicon keyed by WordNet synset.  The adjective lexicon becomes
  the auxiliary word/pos/score TSV; the dict index files become the
  word -> POS table used for noun detection.

Usage::

    python scripts/build_resources.py [--pattern3 SDIST] [--sentiword TGZ]
"""

import argparse
import collections
import gzip
import io
import json
import re
import tarfile
import urllib.request
import xml.etree.ElementTree as ET
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
PATTERN3_URL = "https://pypi.org/simple/pattern3/"
SENTIWORD_URL = "https://registry.npmjs.org/sentiword/-/sentiword-0.0.1.tgz"
WN_DIR = "pattern3-3.0.0/pattern3/text/en/wordnet/dict/"
SENTIMENT_XML = "pattern3-3.0.0/pattern3/text/en/en-sentiment.xml"
SS_TYPE_POS = {"1": "n", "2": "v", "3": "a", "4": "r", "5": "a"}
WORD_RE = re.compile(r"^[a-z]+$")


def _fetch(url):
    with urllib.request.urlopen(url, timeout=120) as resp:
        return resp.read()


def _pattern3_sdist():
    page = _fetch(PATTERN3_URL).decode()
    url = re.search(r'href="([^"#]*pattern3-3\.0\.0\.tar\.gz)', page).group(1)
    return _fetch(url)


def _read_member(tar, name):
    return tar.extractfile(name).read().decode("utf-8", errors="replace")


def build(pattern3_bytes, sentiword_bytes, out_data, out_pkg):
    p3 = tarfile.open(fileobj=io.BytesIO(pattern3_bytes), mode="r:gz")

    # sense numbers keyed by (lemma, pos, synset offset)
    sense_no = {}
    for line in _read_member(p3, WN_DIR + "index.sense").splitlines():
        key, offset, number, _ = line.split(" ")
        lemma, rest = key.split("%", 1)
        pos = SS_TYPE_POS[rest[0]]
        sense_no[(lemma, pos, int(offset))] = int(number)

    # word -> POS letters, single-token lemmas only
    pos_of = collections.defaultdict(set)
    for pos in ("noun", "verb", "adj", "adv"):
        for line in _read_member(p3, WN_DIR + "index." + pos).splitlines():
            if line.startswith(" "):
                continue
            lemma, letter = line.split(" ", 2)[:2]
            if WORD_RE.match(lemma):
                pos_of[lemma].add(letter)
    out_pkg.mkdir(parents=True, exist_ok=True)
    with gzip.GzipFile(out_pkg / "wordnet_pos.tsv.gz", "wb", mtime=0) as gz:
        for word in sorted(pos_of):
            gz.write(f"{word}\t{''.join(sorted(pos_of[word]))}\n".encode())

    # adjective polarity lexicon -> word<TAB>pos<TAB>score
    root = ET.fromstring(_read_member(p3, SENTIMENT_XML))
    rows = []
    for w in root.iter("word"):
        form = w.get("form", "").lower()
        if w.get("polarity") is None or not form:
            continue
        pos = {"JJ": "a", "NN": "n", "VB": "v", "RB": "r"}.get(w.get("pos"), "a")
        rows.append(f"{form}\t{pos}\t{float(w.get('polarity'))}")
    out_data.mkdir(parents=True, exist_ok=True)
    (out_data / "pattern_adjectives.tsv").write_text(
        "# word\tpos\tpolarity (WordNet-keyed adjective lexicon, PDDL)\n"
        + "\n".join(rows) + "\n", encoding="utf-8")

    # SentiWordNet rows regrouped by synset
    sw = tarfile.open(fileobj=io.BytesIO(sentiword_bytes), mode="r:gz")
    data = json.loads(sw.extractfile("package/build/modifiedSentiWordNet.json").read())
    synsets = collections.OrderedDict()
    for group in ("adjective", "noun", "adverb", "verb"):
        for r in data[group]:
            key = (r["# POS"], int(r["ID"]))
            entry = synsets.setdefault(key, [r["PosScore"], r["NegScore"], []])
            entry[2].append(r["SynsetTerms"])
    header = (
        "# SentiWordNet 3.0 (CC BY-SA 3.0), rebuilt from the npm 'sentiword' "
        "package; glosses omitted.\n"
        "# POS\tID\tPosScore\tNegScore\tSynsetTerms\tGloss\n")
    with gzip.GzipFile(out_data / "sentiwordnet_3.0.tsv.gz", "wb", mtime=0) as gz:
        gz.write(header.encode())
        for (pos, offset) in sorted(synsets, key=lambda k: ("anrv".index(k[0]), k[1])):
            ps, ns, terms = synsets[(pos, offset)]
            seen = []
            for t in terms:
                if t not in seen:
                    seen.append(t)
            cells = " ".join(f"{t}#{sense_no.get((t, pos, offset), 1)}" for t in seen)
            gz.write(f"{pos}\t{offset:08d}\t{ps}\t{ns}\t{cells}\t\n".encode())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pattern3", type=Path, help="local pattern3-3.0.0.tar.gz")
    ap.add_argument("--sentiword", type=Path, help="local sentiword-0.0.1.tgz")
    args = ap.parse_args()
    p3 = args.pattern3.read_bytes() if args.pattern3 else _pattern3_sdist()
    sw = args.sentiword.read_bytes() if args.sentiword else _fetch(SENTIWORD_URL)
    build(p3, sw, ROOT / "data" / "lexicon", ROOT / "src" / "bilstm_sentiment" / "data")


if __name__ == "__main__":
    main()
