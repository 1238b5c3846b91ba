#!/usr/bin/env python3
"""Generate the synthetic test fixtures.

Writes a seven-topic classification set and a four-choice reading set in a
made-up language whose words are a fixed cipher of English words, so word
alignment and dictionary induction have a recoverable answer.

usage: make_fixtures.py OUT_DIR
"""
import json
import pathlib
import random
import sys

LABELS = ["science/technology", "travel", "politics", "sports", "health", "entertainment", "geography"]
SPLIT_COUNTS = {
    "train": [176, 138, 102, 84, 77, 65, 59],
    "dev": [25, 19, 15, 12, 11, 9, 8],
    "test": [51, 40, 30, 25, 22, 19, 17],
}

TOPIC_WORDS = {
    "science/technology": ["scientists", "research", "computer", "space", "energy", "laboratory", "telescope", "data"],
    "travel": ["tourists", "hotel", "flight", "airport", "passport", "journey", "visitors", "trip"],
    "politics": ["government", "election", "minister", "president", "parliament", "voters", "policy", "senate"],
    "sports": ["team", "match", "players", "championship", "football", "tournament", "coach", "season"],
    "health": ["disease", "patients", "doctors", "hospital", "virus", "treatment", "vaccine", "symptoms"],
    "entertainment": ["film", "music", "festival", "album", "actor", "concert", "singer", "audience"],
    "geography": ["river", "mountains", "island", "ocean", "region", "climate", "lake", "desert"],
}
SUBJECTS = ["the", "many", "some", "several", "local", "young", "older", "new"]
VERBS = ["reported", "described", "watched", "praised", "studied", "changed", "visited", "discussed", "found",
         "expected"]
LINKS = ["near", "after", "during", "before", "around", "beyond", "inside", "without"]
TAILS = ["last", "this", "every", "next", "each"]
TIMES = ["week", "year", "month", "morning", "summer", "winter", "evening"]

SYLLABLES = ["ka", "lo", "mi", "ru", "te", "no", "sa", "vu", "zi", "pe", "do", "ga", "hu", "ni", "bo", "ye", "fa",
             "qu", "wo", "xi"]


def cipher_table(rng, vocab):
    table = {}
    used = set()
    for word in sorted(vocab):
        while True:
            n = 2 + rng.randrange(2)
            form = "".join(rng.choice(SYLLABLES) for _ in range(n))
            if form not in used:
                used.add(form)
                table[word] = form
                break
    return table


def sentence(rng, topic):
    kw = rng.sample(TOPIC_WORDS[topic], 2)
    words = [rng.choice(SUBJECTS), kw[0], rng.choice(VERBS), rng.choice(LINKS), "the", kw[1],
             rng.choice(TAILS), rng.choice(TIMES)]
    return words


def classification(rng, table):
    rows = []
    seen = set()
    for split, counts in SPLIT_COUNTS.items():
        for label, count in zip(LABELS, counts):
            for _ in range(count):
                while True:
                    en = sentence(rng, label)
                    key = " ".join(en)
                    if key not in seen:
                        seen.add(key)
                        break
                rows.append({"split": split, "label": label, "text_en": key,
                             "text": " ".join(table[w] for w in en)})
    rng.shuffle(rows)
    for i, r in enumerate(rows):
        r["id"] = f"sib-{i:04d}"
    return [{k: r[k] for k in ("id", "text", "text_en", "label", "split")} for r in rows]


def multichoice(rng, table):
    rows = []
    sizes = {"train": 24, "dev": 8, "test": 16}
    topics = list(TOPIC_WORDS)
    n = 0
    for split, size in sizes.items():
        for _ in range(size):
            topic = rng.choice(topics)
            en = sentence(rng, topic) + ["and"] + sentence(rng, topic)
            answer = rng.randrange(4)
            distractors = [t for t in topics if t != topic]
            rng.shuffle(distractors)
            choices = distractors[:3]
            choices.insert(answer, topic)
            rows.append({
                "id": f"mc-{n:03d}",
                "passage": " ".join(table[w] for w in en),
                "passage_en": " ".join(en),
                "question": "What is the passage mostly about?",
                "choices": choices,
                "answer": answer,
                "split": split,
            })
            n += 1
    return rows


def main():
    out = pathlib.Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240601)
    vocab = set(SUBJECTS + VERBS + LINKS + TAILS + TIMES + ["the", "and"])
    for words in TOPIC_WORDS.values():
        vocab.update(words)
    table = cipher_table(rng, vocab)
    with open(out / "pseudo_topics.jsonl", "w", encoding="utf-8") as f:
        for r in classification(rng, table):
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    with open(out / "pseudo_reading.jsonl", "w", encoding="utf-8") as f:
        for r in multichoice(rng, table):
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    with open(out / "pseudo_cipher.tsv", "w", encoding="utf-8") as f:
        for en, tgt in sorted(table.items(), key=lambda kv: kv[1]):
            f.write(f"{tgt}\t{en}\n")


if __name__ == "__main__":
    main()
