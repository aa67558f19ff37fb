#!/usr/bin/env python3
"""Regenerates the committed test fixtures. Deterministic; rerun after
editing and commit the results together with any golden files."""

import csv
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"

# --- KB triples: topic, property, vehicle, frequency, plausibility ----------

KB = [
    ("stefan", "graceful", "dancer", 6, 0.9),
    ("stefan", "quick", "cat", 3, 0.5),
    ("stefan", "fast", "lightning", 1, 0.4),
    ("stefan", "precise", "automaton", 4, 0.8),
    ("man", "quiet", "cat", 40, 0.6),
    ("girl", "agile", "cat", 25, 0.7),
    ("woman", "graceful", "dancer", 5, 0.9),
    ("storm", "fast", "lightning", 9, 0.8),
    ("him", "loud", "wolf", 12, 0.9),
    ("him", "sad", "dog", 8, 0.6),
    ("him", "loud", "wind", 3, 0.7),
    ("him", "lonely", "ghost", 2, 0.5),
    ("her eyes", "bright", "diamonds", 7, 0.9),
    ("her eyes", "bright", "stars", 10, 0.9),
    ("her eyes", "cold", "ice", 4, 0.8),
    ("her eyes", "dark", "coal", 2, 0.6),
    ("her voice", "sweet", "honey", 6, 0.9),
    ("her voice", "soft", "silk", 3, 0.8),
    ("her voice", "sharp", "knife", 2, 0.7),
    ("the room", "cold", "tomb", 3, 0.8),
    ("the room", "quiet", "library", 5, 0.9),
    ("the room", "hot", "oven", 4, 0.9),
    ("she", "busy", "bee", 9, 0.9),
    ("she", "fast", "rocket", 2, 0.6),
    ("he", "strong", "ox", 8, 0.9),
    ("he", "strong", "bull", 5, 0.8),
    ("the car", "fast", "bullet", 6, 0.9),
    ("the car", "loud", "jet", 2, 0.5),
    ("his heart", "heavy", "stone", 7, 0.9),
    ("his heart", "heavy", "lead", 3, 0.8),
    ("the crowd", "loud", "thunder", 4, 0.8),
    ("the crowd", "angry", "sea", 2, 0.6),
    ("the crowd", "busy", "bees", 3, 0.7),
]

# --- candidate sets -----------------------------------------------------------

SETS = [
    ("t9r1", "Stefan moved, every movement easy and precisely controlled.",
     "Stefan moved like a dancer, every movement easy and precisely controlled.",
     [("cat", "Stefan moved like a cat, every movement easy and precisely controlled."),
      ("dancer", "Stefan moved like a dancer, every movement easy and precisely controlled."),
      ("lightning", "Stefan moved like lightning, every movement easy and precisely controlled."),
      ("automaton", "Stefan moved like an automaton, every movement easy and precisely controlled."),
      ("cat_star", "Stefan moved like a cat, every movement easy and precisely controlled.")]),
    ("howl", "But his next line called for him to howl.",
     "But his next line called for him to howl like a wolf.",
     [("wolf", "But his next line called for him to howl like a wolf."),
      ("dog", "But his next line called for him to howl like a sad dog."),
      ("wind", "But his next line called for him to howl like the wind."),
      ("ghost", "But his next line called for him to howl like a lonely ghost.")]),
    ("eyes", "In the dark, her eyes shone.",
     "In the dark, her eyes shone like diamonds.",
     [("diamonds", "In the dark, her eyes shone like diamonds."),
      ("stars", "In the dark, her eyes shone like stars."),
      ("ice", "In the dark, her eyes shone like cold ice."),
      ("coal", "In the dark, her eyes shone like coal.")]),
    ("voice", "Her voice flowed, calm and gentle.",
     "Her voice flowed like honey, calm and gentle.",
     [("honey", "Her voice flowed like honey, calm and gentle."),
      ("silk", "Her voice flowed like soft silk, calm and gentle."),
      ("knife", "Her voice flowed like a knife, calm and gentle.")]),
    ("room", "The room felt cold and still.",
     "The room felt like a tomb, cold and still.",
     [("tomb", "The room felt like a tomb, cold and still."),
      ("library", "The room felt like a library, cold and still."),
      ("oven", "The room felt like an oven, cold and still."),
      ("nothing", "The room felt cold and still.")]),
    ("busy", "All day she worked.",
     "All day she worked like a bee.",
     [("bee", "All day she worked like a bee."),
      ("rocket", "All day she worked like a rocket."),
      ("machine", "All day she worked like a tireless machine.")]),
    ("strong", "He lifted the beam with ease.",
     "He lifted the beam like an ox with ease.",
     [("ox", "He lifted the beam like an ox with ease."),
      ("bull", "He lifted the beam like a bull with ease."),
      ("giant", "He lifted the beam like a gentle giant with ease."),
      ("feather", "He lifted the beam like a feather with ease."),
      ("crane", "He lifted the beam like a crane with ease.")]),
    ("car", "The car raced down the hill.",
     "The car raced down the hill like a bullet.",
     [("bullet", "The car raced down the hill like a bullet."),
      ("jet", "The car raced down the hill like a jet."),
      ("snail", "The car raced down the hill like a snail.")]),
    ("heart", "His heart sank, heavy with grief.",
     "His heart sank like a stone, heavy with grief.",
     [("stone", "His heart sank like a stone, heavy with grief."),
      ("lead", "His heart sank like lead, heavy with grief."),
      ("bird", "His heart sank like a wounded bird, heavy with grief."),
      ("anchor", "His heart sank like an anchor, heavy with grief.")]),
    ("crowd", "The crowd roared when the gates opened.",
     "The crowd roared like thunder when the gates opened.",
     [("thunder", "The crowd roared like thunder when the gates opened."),
      ("sea", "The crowd roared like an angry sea when the gates opened."),
      ("bees", "The crowd roared like bees when the gates opened."),
      ("lions", "The crowd roared like hungry lions when the gates opened.")]),
]

# (set, candidate) -> reason; the only rows the filter may remove
PLANTED = {
    ("howl", "ghost"): "divided_quality",
    ("eyes", "coal"): "divided_quality",
    ("strong", "feather"): "divided_quality",
    ("crowd", "bees"): "lacks_context",
}


def write_kb():
    with open(OUT / "kb.tsv", "w") as f:
        f.write("# topic\tproperty\tvehicle\tfrequency\tplausibility\n")
        for row in KB:
            f.write("\t".join(str(x) for x in row) + "\n")


def write_sets():
    with open(OUT / "sets.jsonl", "w") as f:
        for set_id, literal, ref, cands in SETS:
            f.write(json.dumps({"set_id": set_id, "literal": literal, "reference": ref,
                                "candidates": [{"id": i, "text": t} for i, t in cands]}) + "\n")


def write_ratings(rng):
    # Unplanted candidates get scores within {b, b+1}: never both {1,2} and {4,5}.
    rows = []
    for set_id, _, _, cands in SETS:
        for cid, _ in cands:
            planted = PLANTED.get((set_id, cid))
            for persp in ("quality", "creativity", "informativeness"):
                b = rng.randint(1, 4)
                scores = [rng.choice((b, b + 1)) for _ in range(3)]
                if planted == "divided_quality" and persp == "quality":
                    scores = [rng.choice((1, 2)), rng.choice((4, 5)), 3]
                for r, s in enumerate(scores):
                    ctx = int(planted == "lacks_context" and persp == "quality" and r == 1)
                    rows.append((set_id, cid, f"r{r + 1}", persp, s, ctx))
    with open(OUT / "ratings.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(("set_id", "candidate_id", "rater_id", "perspective", "score", "lacks_context"))
        w.writerows(rows)
    with open(OUT / "ratings_planted.tsv", "w") as f:
        for (s, c), reason in sorted(PLANTED.items()):
            f.write(f"{s}\t{c}\t{reason}\n")


# --- 10k-line simile corpus ----------------------------------------------------

TOPICS = ["He", "She", "The man", "the girl", "The old dog", "Her eyes", "His voice",
          "The night", "My heart", "The river", "THE CROWD", "Their house", "The wind"]
EVENTS = ["ran", "shone", "sang", "moved", "fell", "roared", "glowed", "trembled", "waited"]
VEHICLES = ["a deer", "the wind", "a lion", "diamonds", "an angel", "a stone", "thunder",
            "a ghost", "a river", "a cat", "fire", "a child", "glass", "an old clock",
            "a storm at sea", "the sun", "a wounded bird", "ice", "A Wolf", "silk"]


def instance(text, topic, event, vehicle):
    """Appends 'topic event like vehicle' to text and returns spans."""
    spans = {}
    if topic is not None:
        spans["topic"] = [len(text), len(text) + len(topic)]
        text += topic + " "
    spans["event"] = [len(text), len(text) + len(event)]
    text += event + " "
    spans["comparator"] = [len(text), len(text) + 4]
    text += "like "
    spans["vehicle"] = [len(text), len(text) + len(vehicle)]
    text += vehicle
    if topic is None:
        spans["topic"] = None
    return text, spans


def corpus_line(rng):
    weights = [1.0 / (k + 1) for k in range(len(VEHICLES))]
    u = rng.random()
    if u < 0.01:
        return '{"text": "broken'  # malformed JSON
    if u < 0.02:
        return json.dumps({"text": "short", "instances": [
            {"topic": None, "event": None, "comparator": [0, 2], "vehicle": [3, 40]}]})
    topic = rng.choice(TOPICS) if rng.random() > 0.1 else None
    text, a = instance("", topic, rng.choice(EVENTS), rng.choices(VEHICLES, weights)[0])
    insts = [a]
    if rng.random() < 0.15:
        text += " and "
        # second instance shares the topic but has no topic span of its own
        text, b = instance(text, None, rng.choice(EVENTS), rng.choices(VEHICLES, weights)[0])
        b["topic"] = a["topic"]
        insts.append(b)
    if rng.random() < 0.2:
        text += ","  # punctuation outside the vehicle span
    return json.dumps({"text": text + ".", "instances": insts})


def write_corpus(rng):
    with open(OUT / "corpus_10k.jsonl", "w") as f:
        for _ in range(10000):
            f.write(corpus_line(rng) + "\n")


# --- raw sentences for prep ------------------------------------------------------

PREP = [
    {"text": "He yelps and howls like a wolf."},
    {"text": "Her smile was like sunshine."},  # linking verb: rejected
    {"text": "The sky was grey."},  # no simile
    {"text": "Stefan moved like a dancer, every movement easy and precisely controlled."},
    {"text": "The rain fell like tears on the roof."},
    {"text": "She is as brave as a lion."},  # only with --allow-as
    {"bad": "record"},
]


def write_prep():
    with open(OUT / "similes_raw.jsonl", "w") as f:
        for r in PREP:
            f.write(json.dumps(r) + "\n")


def main():
    OUT.mkdir(exist_ok=True)
    rng = random.Random(20240607)
    write_kb()
    write_sets()
    write_ratings(rng)
    write_corpus(rng)
    write_prep()


if __name__ == "__main__":
    main()
