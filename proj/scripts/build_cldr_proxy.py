#!/usr/bin/env python3
"""Build parallel "target ||| english" files from CLDR JSON locale data.

Every leaf string of a target locale is paired with the English string at
the same key path. Only strings written in the requested script are kept.

usage: build_cldr_proxy.py CLDR_ROOT OUT_DIR

CLDR_ROOT holds the unpacked npm packages cldr-localenames-full,
cldr-dates-full, cldr-misc-full and cldr-units-full.
"""
import json
import pathlib
import sys

PACKAGES = ["cldr-localenames-full", "cldr-dates-full", "cldr-misc-full", "cldr-units-full"]
TARGETS = {
    "sat_Olck": (["sat-Olck", "sat"], (0x1C50, 0x1C7F)),
    "nqo_Nkoo": (["nqo"], (0x07C0, 0x07FF)),
}


def leaves(node, path=()):
    if isinstance(node, dict):
        for k, v in node.items():
            yield from leaves(v, path + (k,))
    elif isinstance(node, str):
        yield path, node


def locale_strings(root, locale):
    out = {}
    for pkg in PACKAGES:
        base = root / pkg / "package" / "main" / locale
        if not base.is_dir():
            continue
        for f in sorted(base.glob("*.json")):
            data = json.loads(f.read_text(encoding="utf-8"))["main"][locale]
            for path, value in leaves(data):
                if path and path[0] == "identity":
                    continue
                out.setdefault((pkg, f.name) + path, value)
    return out


def in_script(text, lo, hi):
    return any(lo <= ord(ch) <= hi for ch in text)


def main():
    root = pathlib.Path(sys.argv[1])
    out_dir = pathlib.Path(sys.argv[2])
    english = locale_strings(root, "en")
    for code, (locales, (lo, hi)) in TARGETS.items():
        seen = set()
        pairs = []
        for loc in locales:
            for key, value in sorted(locale_strings(root, loc).items()):
                en = english.get(key)
                value = " ".join(value.split())
                if not en or not in_script(value, lo, hi) or "|||" in value or "|||" in en:
                    continue
                en = " ".join(en.split())
                if (value, en) in seen:
                    continue
                seen.add((value, en))
                pairs.append(f"{value} ||| {en}")
        (out_dir / f"cldr_{code}.txt").write_text("\n".join(pairs) + "\n", encoding="utf-8")
        print(code, len(pairs))


if __name__ == "__main__":
    main()
