"""Reference builder for tests/fixtures/golden_dataset.jsonl.

A deliberately plain re-statement of the weak-labeling rules, written
independently of the C++ library. It handles the markup used in the fixture
corpus (templates, refs, comments, links, emphasis, bullets) and nothing more.

usage: golden_dataset.py CORPUS.jsonl SEED > golden.jsonl
"""
import json
import re
import sys

MASK = (1 << 64) - 1
LEXICON = {"history", "creation", "leadership", "corporate", "acquisitions",
           "growth", "finance", "financial", "lawsuits", "litigation", "legal"}
ABBREVIATIONS = {"Inc", "Corp", "Co", "Ltd", "LLC", "Mr", "Mrs", "Ms", "Dr",
                 "St", "Jr", "Sr", "No", "vs", "approx", "e.g", "i.e", "U.S",
                 "U.K", "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug",
                 "Sep", "Oct", "Nov", "Dec"}
MONTHS = ["January", "February", "March", "April", "May", "June", "July",
          "August", "September", "October", "November", "December"]
DATE_RE = re.compile(r"^(On|In|By|As of) (" + "|".join(MONTHS) +
                     r") ([12][0-9]{3})(?![0-9A-Za-z]),?\s*")


# --- seeded randomness -------------------------------------------------------

def fnv1a64(text):
    h = 0xcbf29ce484222325
    for b in text.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001b3) & MASK
    return h


class SplitMix64:
    def __init__(self, state):
        self.state = state & MASK

    def next(self):
        self.state = (self.state + 0x9e3779b97f4a7c15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xbf58476d1ce4e5b9) & MASK
        z = ((z ^ (z >> 27)) * 0x94d049bb133111eb) & MASK
        return z ^ (z >> 31)

    def below(self, bound):
        threshold = ((1 << 64) - bound) % bound
        while True:
            r = self.next()
            if r >= threshold:
                return r % bound

    def shuffle(self, items):
        for i in range(len(items), 1, -1):
            j = self.below(i)
            items[i - 1], items[j] = items[j], items[i - 1]


def substream(seed, name):
    return SplitMix64(seed ^ fnv1a64(name))


# --- markup ------------------------------------------------------------------

def remove_templates(s):
    while True:
        # innermost {{...}} first
        new = re.sub(r"\{\{(?:(?!\{\{|\}\}).)*\}\}", "", s, flags=re.S)
        if new == s:
            return s
        s = new


def strip(s):
    s = re.sub(r"<!--.*?-->", "", s, flags=re.S)
    s = re.sub(r"<ref[^>]*/>", "", s)
    s = re.sub(r"<ref[^>]*>.*?</ref>", "", s, flags=re.S)
    s = remove_templates(s)
    s = re.sub(r"\[\[Category:[^\]]*\]\]", "", s)
    s = re.sub(r"\[\[[^\]|]*\|([^\]]*)\]\]", r"\1", s)
    s = re.sub(r"\[\[([^\]]*)\]\]", r"\1", s)
    s = re.sub(r"'{2,}", "", s)
    s = "\n".join(re.sub(r"^\s*[*#:;]+", "", line) for line in s.split("\n"))
    return " ".join(s.split())


def parse(title, markup):
    markup = remove_templates(re.sub(r"<!--.*?-->", "", markup, flags=re.S))
    sections = []
    current_title, body = None, []
    for line in markup.split("\n"):
        m = re.match(r"^\s*(={2,6})\s*(.*?)\s*\1\s*$", line)
        if m:
            sections.append((current_title, strip("\n".join(body))))
            current_title, body = strip(m.group(2)), []
        else:
            body.append(line)
    sections.append((current_title, strip("\n".join(body))))
    out = []
    for t, text in sections:
        if t is None:
            if text:
                out.append(("", text))
        else:
            out.append((t, text))
    company = re.sub(r"\s+\([^()]*\)\s*$", "", title).strip()
    return title.strip(), company, out


def split_sentences(text):
    pieces, start = [], 0
    for m in re.finditer(r"[.!?]+\s+(?=[A-Z0-9\"'])", text):
        end = m.start() + len(m.group(0).rstrip())
        word = text[:m.start()].split(" ")[-1].lstrip("(")
        if text[m.start()] == "." and word in ABBREVIATIONS:
            continue
        pieces.append(text[start:end].strip())
        start = m.end()
    pieces.append(text[start:].strip())
    return [p for p in pieces if p]


# --- labeling ----------------------------------------------------------------

def label_article(article_id, company, sections):
    positives, candidates = [], []
    for si, (title, text) in enumerate(sections):
        event = any(w in LEXICON for w in re.findall(r"[a-z0-9]+", title.lower()))
        for k, sentence in enumerate(split_sentences(text)):
            m = DATE_RE.match(sentence)
            origin = (article_id, si, k)
            if event and m:
                rest = sentence[m.end():].lstrip(", \t\n")
                if not re.search(r"[A-Za-z0-9]", rest):
                    continue
                rest = re.sub(r"[A-Za-z]", lambda c: c.group(0).upper(), rest, count=1)
                positives.append(dict(text=rest, label="pos", company=company,
                                      year=int(m.group(3)), month=m.group(2),
                                      origin=origin))
            elif not event and not m:
                candidates.append(dict(text=sentence, label="neg",
                                       company=company, origin=origin))
    return positives, candidates


def prefixed(text, company):
    t = text.lower()
    return t.startswith(company.lower()) or t.startswith("the company")


def balance(positives, candidates, company, seed):
    rng = substream(seed, "sampling:" + company)
    if len(candidates) < len(positives):
        rng.shuffle(positives)
        positives = sorted(positives[:len(candidates)], key=lambda r: r["origin"])
        return positives, candidates
    p = sum(prefixed(x["text"], company) for x in positives)
    with_prefix = [c for c in candidates if prefixed(c["text"], company)]
    without = [c for c in candidates if not prefixed(c["text"], company)]
    rng.shuffle(with_prefix)
    rng.shuffle(without)
    take = min(p, len(with_prefix))
    chosen = with_prefix[:take]
    need = len(positives) - take
    chosen += without[:need]
    need -= min(need, len(without))
    chosen += with_prefix[take:take + need]
    return positives, sorted(chosen, key=lambda r: r["origin"])


def main():
    corpus, seed = sys.argv[1], int(sys.argv[2])
    articles = []
    for line in open(corpus, encoding="utf-8"):
        try:
            record = json.loads(line)
        except ValueError:
            continue
        articles.append(parse(record["title"], record["markup"]))
    articles.sort(key=lambda a: a[0])

    all_pos, all_neg = [], []
    for article_id, company, sections in articles:
        positives, candidates = label_article(article_id, company, sections)
        seen, dedup_pos = set(), []
        for x in positives:
            if x["text"] not in seen:
                seen.add(x["text"])
                dedup_pos.append(x)
        seen_c, dedup_c = set(), []
        for x in candidates:
            if x["text"] not in seen and x["text"] not in seen_c:
                seen_c.add(x["text"])
                dedup_c.append(x)
        pos, neg = balance(dedup_pos, dedup_c, company, seed)
        all_pos += pos
        all_neg += neg

    # cross-article dedupe (none expected in the fixture)
    examples = sorted(all_pos + all_neg, key=lambda r: r["origin"])

    train = [x for x in examples if x["label"] == "pos" and x["year"] <= 2018]
    test = [x for x in examples if x["label"] == "pos" and x["year"] == 2019]
    negatives = [x for x in examples if x["label"] == "neg"]
    rng = substream(seed, "split")
    rng.shuffle(negatives)
    n_train, n_test = len(train), len(test)
    assert len(negatives) >= n_train + n_test
    train += negatives[:n_train]
    test += negatives[n_train:n_train + n_test]
    train.sort(key=lambda r: r["origin"])
    test.sort(key=lambda r: r["origin"])

    for split, rows in (("train", train), ("test", test)):
        for r in rows:
            out = {"text": r["text"], "label": r["label"], "company": r["company"]}
            if "year" in r:
                out["year"] = r["year"]
                out["month"] = r["month"]
            out["split"] = split
            out["origin"] = {"article_id": r["origin"][0],
                             "section_index": r["origin"][1],
                             "sentence_index": r["origin"][2]}
            sys.stdout.write(json.dumps(out, ensure_ascii=False,
                                        separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
