#!/usr/bin/env python3
"""Recomputes every number in the golden score report from kb.tsv, hand
annotated simile components and the documented stub classifier rules.

usage: check_golden.py FIXTURES_DIR GOLDEN_REPORT
"""

import json
import math
import re
import sys
from collections import defaultdict

POSITIVE = set("""good great happy joy joyful love lovely beautiful bright warm gentle calm
peaceful sweet kind brave bold strong graceful elegant easy precisely delight delighted glad
cheerful smile smiling laugh laughing shine shining glow glowing gleam gleamed glitter sparkle
sparkling diamond diamonds angel dancer ballerina flower rose roses sun sunshine light hope
proud free soft pure fresh wonderful brilliant clear gold golden treasure controlled triumph
victory glory thunderous""".split())
NEGATIVE = set("""bad sad angry anger fear afraid scared frightened terrible horrible awful
cruel cold dark darkness pain painful hurt cry crying tears weep broken dead death die dying
ugly evil hell monster destruction shadow storm wounded sick poison drug fiend coward cowards
cowardly rag deflated collapsed lonely empty hate hated violent rage grim bleak dull heavy stone
lead sink sank drown earthquake vitriol predator volcano boiling""".split())
ANTONYMS = [("slow", "fast"), ("slowly", "quickly"), ("calm", "angry"), ("easy", "hard"),
            ("easy", "difficult"), ("quiet", "loud"), ("gentle", "violent"), ("light", "heavy"),
            ("hot", "cold"), ("happy", "sad"), ("controlled", "wild"), ("precisely", "clumsily"),
            ("rise", "sink"), ("up", "down"), ("bright", "dark"), ("alive", "dead"),
            ("young", "old"), ("soft", "hard")]

# set -> (topic, event, {candidate: vehicle}); a missing vehicle means no simile
ANNOTATIONS = {
    "t9r1": ("Stefan", "moved", {"cat": "a cat", "dancer": "a dancer", "lightning": "lightning",
                                 "automaton": "an automaton", "cat_star": "a cat"}),
    "howl": ("him", "howl", {"wolf": "a wolf", "dog": "a sad dog", "wind": "the wind",
                             "ghost": "a lonely ghost"}),
    "eyes": ("her eyes", "shone", {"diamonds": "diamonds", "stars": "stars", "ice": "cold ice",
                                   "coal": "coal"}),
    "voice": ("Her voice", "flowed", {"honey": "honey", "silk": "soft silk", "knife": "a knife"}),
    "room": ("The room", "felt", {"tomb": "a tomb", "library": "a library", "oven": "an oven",
                                  "nothing": None}),
    "busy": ("she", "worked", {"bee": "a bee", "rocket": "a rocket", "machine": "a tireless machine"}),
    "strong": ("He", "lifted", {"ox": "an ox", "bull": "a bull", "giant": "a gentle giant",
                                "feather": "a feather", "crane": "a crane"}),
    "car": ("The car", "raced", {"bullet": "a bullet", "jet": "a jet", "snail": "a snail"}),
    "heart": ("His heart", "sank", {"stone": "a stone", "lead": "lead", "bird": "a wounded bird",
                                    "anchor": "an anchor"}),
    "crowd": ("The crowd", "roared", {"thunder": "thunder", "sea": "an angry sea", "bees": "bees",
                                      "lions": "hungry lions"}),
}


def norm(p):
    while True:
        q = re.sub(r"\s+", " ", p.lower().strip(" \t\n.,;:!?'\"()-")).strip()
        for art in ("a ", "an ", "the "):
            if q.startswith(art) and len(q) > len(art):
                q = q[len(art):]
                break
        if q == p:
            return q
        p = q


def words(s):
    return [w.lower() for w in re.findall(r"[A-Za-z0-9]+(?:['-][A-Za-z0-9]+)*", s)]


def nli_contradiction(premise, hypothesis):
    P, H = set(words(premise)), set(words(hypothesis))
    for a, b in ANTONYMS:
        if (a in P and b in H) or (b in P and a in H):
            return 0.8
    common = len(P & H)
    if common in (len(P), len(H)):
        return 0.0
    return 0.3 * (1 - common / len(P | H))


def positive(text):
    ws = words(text)
    p = sum(w in POSITIVE for w in ws)
    n = sum(w in NEGATIVE for w in ws)
    return (p + 1) / (p + n + 2)


def minmax(xs):
    lo, hi = min(xs), max(xs)
    return [0.5] * len(xs) if lo == hi else [(x - lo) / (hi - lo) for x in xs]


def main():
    fixtures, golden = sys.argv[1], sys.argv[2]
    mass = defaultdict(float)
    vcount = defaultdict(int)
    for line in open(f"{fixtures}/kb.tsv"):
        if line.startswith("#") or not line.strip():
            continue
        t, _, v, n, p = line.rstrip("\n").split("\t")
        mass[(norm(t), norm(v))] += int(n) * float(p)
        vcount[norm(v)] += int(n)

    expected = {}
    for line in open(f"{fixtures}/sets.jsonl"):
        s = json.loads(line)
        topic, event, vehicles = ANNOTATIONS[s["set_id"]]
        lit = s["literal"]
        lit_prefix = lit[:lit.index(event) + len(event)]
        rows = {}
        for c in s["candidates"]:
            v = vehicles[c["id"]]
            if v is None:
                rows[c["id"]] = None
                continue
            text = c["text"]
            sim_prefix = text[:text.index("like " + v) + len("like " + v)]
            lp = positive(lit_prefix)
            sp = positive(sim_prefix)
            rows[c["id"]] = {
                "r": mass[(norm(topic), norm(v))],
                "c_l": 1 - nli_contradiction(lit, text),
                "c_s": sp - lp if lp >= 1 - lp else (1 - sp) - (1 - lp),
                "C": -math.log(vcount[norm(v)] + 1),
                "I": float(len(v.split())),
            }
        valid = [k for k, r in rows.items() if r]
        for key in ("r", "c_l", "c_s"):
            for k, x in zip(valid, minmax([rows[k][key] for k in valid])):
                rows[k][key + "_n"] = x
        for k in valid:
            r = rows[k]
            r["Q"] = (3 * r["r_n"] + 2 * r["c_l_n"] + r["c_s_n"]) / 6
        for k, r in rows.items():
            expected[(s["set_id"], k)] = r

    bad = 0
    seen = 0
    for line in open(golden):
        g = json.loads(line)
        e = expected.pop((g["set_id"], g["candidate_id"]))
        seen += 1
        if e is None:
            if g["Q"] is not None:
                print("expected invalid:", g["set_id"], g["candidate_id"])
                bad += 1
            continue
        for k, x in e.items():
            if g[k] is None or abs(g[k] - x) > 1e-12 * max(1.0, abs(x)):
                print(f"{g['set_id']}/{g['candidate_id']} {k}: golden {g[k]} oracle {x}")
                bad += 1
    if expected:
        print("missing from golden:", sorted(expected))
        bad += 1
    print(f"{seen} rows checked, {bad} mismatches")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
