#!/usr/bin/env python3
"""Compute reference values with independent implementations and freeze them.

Needs the `tokenizers` and `scipy` packages. Writes
tests/fixtures/oracles/*.json; the C++ tests compare against these files.

usage: freeze_oracles.py REPO_ROOT
"""
import json
import pathlib
import sys

from scipy.stats import chi2
from tokenizers import Tokenizer, decoders, models, normalizers, pre_tokenizers, trainers

TOKENIZER_TEXTS = [
    "Hello world!",
    "The quick brown fox jumps over 12345 lazy dogs.",
    "  leading and trailing   ",
    "中文测试，你好世界。",
    "한국어 텍스트입니다",
    "ᱥᱟᱱᱛᱟᱲᱤ ᱯᱟᱹᱨᱥᱤ",
    "ߒߞߏ ߞߊ߲ ߦߋ߫",
    "emoji 😀👍🏽 mix",
    "tabs\tand\r\ncarriage",
    "Ünïcödé façade naïve café",
    "x=1+2*3/4-5; y<=6",
    "don't won't I'll we've",
    "Ελληνικά κείμενα",
    "Русский текст, числа 3.14",
    "   ",
    "a",
    " nbsp em space",
    "mixed123abc456",
    "<｜begin▁of▁sentence｜>Hi<｜end▁of▁sentence｜>",
    "العربية نص",
    "हिन्दी पाठ",
    "ʻokina ʻ",
    "end with space ",
    "line one\n\nline two\n",
]


METASPACE_TEXTS = [
    "the quick brown fox",
    "the fox ߒߞߏ café",
    "  double  spaces ",
    "scientists travel by train",
    "ﬁne ligature",
    "",
]


def metaspace_bpe():
    """Small SentencePiece-style BPE with byte fallback, trained on the spot."""
    tok = Tokenizer(models.BPE(byte_fallback=True, unk_token=None, fuse_unk=False))
    tok.normalizer = normalizers.NFKC()
    tok.pre_tokenizer = pre_tokenizers.Metaspace(replacement="\u2581", prepend_scheme="first", split=True)
    tok.decoder = decoders.Sequence([decoders.Replace("\u2581", " "), decoders.ByteFallback(), decoders.Fuse(),
                                     decoders.Strip(" ", 1, 0)])
    trainer = trainers.BpeTrainer(vocab_size=400, show_progress=False,
                                  special_tokens=["<unk>"] + [f"<0x{i:02X}>" for i in range(256)])
    corpus = ["the quick brown fox jumps over the lazy dog", "scientists reported the results",
              "travel by train is slow"] * 20
    tok.train_from_iterator(corpus, trainer)
    return tok


class MT19937_64:
    """Reference 64-bit Mersenne Twister (Matsumoto and Nishimura, 2004)."""

    NN, MM = 312, 156
    MATRIX_A = 0xB5026F5AA96619E9
    UM, LM = 0xFFFFFFFF80000000, 0x7FFFFFFF
    MASK = (1 << 64) - 1

    def __init__(self, seed):
        self.mt = [0] * self.NN
        self.mt[0] = seed & self.MASK
        for i in range(1, self.NN):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & self.MASK
        self.mti = self.NN

    def next(self):
        if self.mti >= self.NN:
            mag = [0, self.MATRIX_A]
            for i in range(self.NN):
                x = (self.mt[i] & self.UM) | (self.mt[(i + 1) % self.NN] & self.LM)
                self.mt[i] = self.mt[(i + self.MM) % self.NN] ^ (x >> 1) ^ mag[x & 1]
            self.mti = 0
        x = self.mt[self.mti]
        self.mti += 1
        x ^= (x >> 29) & 0x5555555555555555
        x ^= (x << 17) & 0x71D67FFFEDA60000
        x ^= (x << 37) & 0xFFF7EEE000000000
        x ^= x >> 43
        return x & self.MASK


def sample_random(pool_size, k, seed):
    eng = MT19937_64(seed)
    ids = list(range(pool_size))
    for i in range(k):
        bound = pool_size - i
        threshold = ((1 << 64) - bound) % bound
        while True:
            r = eng.next()
            if r >= threshold:
                break
        j = i + r % bound
        ids[i], ids[j] = ids[j], ids[i]
    return ids[:k]


def read_pairs(path):
    pairs = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if " ||| " in line:
            tgt, en = line.split(" ||| ", 1)
            pairs.append((tgt, en))
    return pairs


def main():
    root = pathlib.Path(sys.argv[1])
    out = root / "tests" / "fixtures" / "oracles"
    out.mkdir(parents=True, exist_ok=True)
    assets = root / "tests" / "assets"

    tok = Tokenizer.from_file(str(assets / "deepseek_llm_7b_tokenizer.json"))
    cases = [{"text": t, "ids": tok.encode(t, add_special_tokens=False).ids} for t in TOKENIZER_TEXTS]

    def count(t):
        return len(tok.encode(t, add_special_tokens=False).ids)

    metrics = {}
    for code in ("sat_Olck", "nqo_Nkoo"):
        pairs = read_pairs(assets / f"cldr_{code}.txt")
        tbr = [count(t) / len(t.encode("utf-8")) for t, _ in pairs]
        tp = [count(e) / count(t) for t, e in pairs]
        metrics[code] = {"pairs": len(pairs), "mean_tbr": sum(tbr) / len(tbr), "mean_tp": sum(tp) / len(tp)}
    (out / "tokenizer.json").write_text(
        json.dumps({"cases": cases, "proxy_metrics": metrics}, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")

    ms = metaspace_bpe()
    ms.save(str(out / "metaspace_bpe.json"))
    ms_cases = []
    for t in METASPACE_TEXTS:
        ids = ms.encode(t, add_special_tokens=False).ids
        ms_cases.append({"text": t, "ids": ids, "decoded": ms.decode(ids, skip_special_tokens=False)})
    (out / "metaspace_bpe_cases.json").write_text(json.dumps({"cases": ms_cases}, ensure_ascii=False, indent=1) + "\n",
                                                  encoding="utf-8")

    eng = MT19937_64(5489)
    for _ in range(9999):
        eng.next()
    rng = {
        "mt19937_64_seed5489_10000th": str(eng.next()),
        "samples": [
            {"pool": pool, "k": k, "seed": seed, "ids": sample_random(pool, k, seed)}
            for pool, k, seed in [(10, 3, s) for s in range(5)] + [(1000, 5, 42), (25, 25, 3), (7, 1, 2**63 + 11)]
        ],
    }
    (out / "random_sampling.json").write_text(json.dumps(rng, indent=1) + "\n", encoding="utf-8")

    points = [0.1, 0.5, 1.0, 49 / 12, 3.841458820694124, 10.0, 25.0, 100.0]
    (out / "chi2.json").write_text(
        json.dumps({"survival_df1": [{"x": x, "p": float(chi2.sf(x, 1))} for x in points]}, indent=1) + "\n",
        encoding="utf-8")


if __name__ == "__main__":
    main()
