#!/usr/bin/env python3
"""Regenerates the bundled toy natural datasets and synthetic embeddings.

Usage: python3 tools/make_toy_data.py data/toy
"""
import json
import random
import sys
from pathlib import Path

import numpy as np

STATES = ["california", "texas", "oregon", "nevada"]
BORDER_STATES = ["california", "oregon", "nevada"]
CAPITAL_STATES = ["california", "texas", "oregon"]
SURFACE = {
    "california": ["california"],
    "texas": ["texas"],
    "oregon": ["oregon"],
    "nevada": ["nevada"],
    "colorado": ["the colorado river", "the colorado"],
    "rio_grande": ["the rio grande"],
    "columbia": ["the columbia river", "the columbia"],
    "whitney": ["mount whitney", "whitney"],
    "guadalupe_peak": ["guadalupe peak"],
}
RIVERS = ["colorado", "rio_grande", "columbia"]
PLACES = ["whitney", "guadalupe_peak"]


def ent(x):
    return f"(entity {x})"


def state_borders(x):
    return f"(and (unary state) (join borders {ent(x)}))"


# (weight, lf builder, slot domains, phrasings)
INTENTS = [
    (6, state_borders, [BORDER_STATES], [
        "what states border {0}", "which states border {0}", "states bordering {0}",
        "what states are next to {0}", "name the states that border {0}",
        "which states are adjacent to {0}", "list the neighboring states of {0}",
        "what are the neighbors of {0}"]),
    (4, lambda x: f"(count {state_borders(x)})", [BORDER_STATES], [
        "how many states border {0}", "how many states are next to {0}",
        "number of states bordering {0}", "how many neighbors does {0} have",
        "count the states adjacent to {0}"]),
    (5, lambda x: f"(join capital {ent(x)})", [CAPITAL_STATES], [
        "what is the capital of {0}", "capital of {0}", "tell me the capital of {0}",
        "what is the capital city of {0}"]),
    (2, lambda x: f"(and (unary city) (join capital {ent(x)}))", [CAPITAL_STATES], [
        "which city is the capital of {0}", "what city is the capital of {0}"]),
    (5, lambda x: f"(sum population {ent(x)})", [STATES], [
        "what is the population of {0}", "how many people live in {0}", "population of {0}",
        "how many residents does {0} have", "how many inhabitants does {0} have"]),
    (3, lambda x: f"(sum area {ent(x)})", [STATES], [
        "what is the area of {0}", "how big is {0}", "how large is {0}",
        "what is the size of {0}"]),
    (2, lambda x: f"(sum density {ent(x)})", [STATES], [
        "what is the population density of {0}", "how dense is {0}"]),
    (3, lambda: "(argmax area (unary state))", [], [
        "what is the largest state", "which state is the biggest", "biggest state",
        "which state has the largest area", "what state is largest"]),
    (2, lambda: "(argmin area (unary state))", [], [
        "what is the smallest state", "smallest state", "which state has the smallest area"]),
    (3, lambda: "(argmax population (unary state))", [], [
        "what is the most populous state", "which state has the most people",
        "which state has the largest population", "what state has the highest population"]),
    (2, lambda: "(argmin population (unary state))", [], [
        "what is the least populous state", "which state has the fewest people",
        "which state has the smallest population"]),
    (1, lambda: "(argmax density (unary state))", [], [
        "which state is the most densely populated",
        "what state has the highest population density"]),
    (2, lambda: "(argmax length (unary river))", [], [
        "what is the longest river", "longest river", "which river is the longest"]),
    (1, lambda: "(argmin length (unary river))", [], [
        "what is the shortest river", "which river is the shortest"]),
    (3, lambda x: f"(join high_point {ent(x)})", [["california", "texas"]], [
        "what is the highest point in {0}", "highest point of {0}",
        "what is the tallest mountain in {0}", "what is the high point of {0}"]),
    (1, lambda x: f"(and (unary place) (join high_point {ent(x)}))", [["california", "texas"]], [
        "which place is the highest point in {0}"]),
    (3, lambda x: f"(sum elevation {ent(x)})", [PLACES], [
        "how high is {0}", "what is the elevation of {0}", "how tall is {0}",
        "what is the height of {0}"]),
    (2, lambda x: f"(sum length {ent(x)})", [RIVERS], [
        "how long is {0}", "what is the length of {0}"]),
    (5, lambda x: f"(and (unary river) (join traverses {ent(x)}))", [STATES], [
        "what rivers run through {0}", "which rivers flow through {0}", "rivers in {0}",
        "what rivers cross {0}", "name the rivers that traverse {0}"]),
    (3, lambda x: f"(count (and (unary river) (join traverses {ent(x)})))", [STATES], [
        "how many rivers run through {0}", "how many rivers are in {0}",
        "number of rivers in {0}"]),
    (1, lambda: "(count (unary state))", [], [
        "how many states are there", "how many states"]),
    (1, lambda: "(count (unary river))", [], [
        "how many rivers are there", "how many rivers"]),
    (2, lambda: "(and (unary state) (larger population (number 10000000)))", [], [
        "which states have more than 10 million people",
        "states with a population over 10 million",
        "what states have a population larger than 10 million"]),
    (1, lambda: "(and (unary state) (smaller population (number 10000000)))", [], [
        "which states have fewer than 10 million people",
        "states with a population under 10 million"]),
    (1, lambda x: f"(and (unary state) (not (join borders {ent(x)})))", [STATES], [
        "what states do not border {0}", "which states are not next to {0}"]),
    (3, lambda x: f"(argmax area {state_borders(x)})", [BORDER_STATES], [
        "what is the largest state that borders {0}", "biggest state bordering {0}",
        "which state next to {0} is the largest"]),
    (2, lambda x: f"(argmax population {state_borders(x)})", [BORDER_STATES], [
        "what is the most populous state bordering {0}",
        "which neighbor of {0} has the most people"]),
    (1, lambda: "(sum population (unary state))", [], [
        "what is the total population of all states",
        "combined population of the states"]),
    (1, lambda: "(sum length (unary river))", [], ["what is the total length of all rivers"]),
    (2, lambda x: f"(sum area {state_borders(x)})", [BORDER_STATES], [
        "what is the combined area of the states bordering {0}",
        "total area of states next to {0}"]),
    (2, lambda x: f"(join capital {state_borders(x)})", [BORDER_STATES], [
        "what are the capitals of the states that border {0}",
        "capitals of states next to {0}"]),
    (2, lambda x, y: f"(and {state_borders(x)} (join borders {ent(y)}))",
     [BORDER_STATES, BORDER_STATES], [
        "which states border both {0} and {1}", "what states are next to {0} and {1}"]),
    (1, lambda x, y: f"(and {state_borders(x)} (not (join borders {ent(y)})))",
     [BORDER_STATES, BORDER_STATES], ["which states border {0} but not {1}"]),
    (1, lambda x, y:
        f"(count (and {state_borders(x)} (not (join borders {ent(y)}))))",
     [BORDER_STATES, BORDER_STATES], ["how many states border {0} but not {1}"]),
    # Beyond what the toy grammar generates.
    (1, lambda: "(sum population (argmax area (unary state)))", [], [
        "what is the population of the largest state",
        "how many people live in the biggest state"]),
    (1, lambda x: f"(and (unary state) (join borders {state_borders(x)}))", [BORDER_STATES], [
        "what states border the states that border {0}"]),
    (1, lambda x: f"(and (unary river) (join traverses {state_borders(x)}))", [BORDER_STATES], [
        "which rivers run through states that border {0}",
        "rivers in states next to {0}"]),
    (1, lambda: "(join capital (argmax area (unary state)))", [], [
        "what is the capital of the largest state", "capital of the biggest state"]),
    (1, lambda: "(and (unary state) (larger population (number 5000000)))", [], [
        "which states have more than 5 million people"]),
]


def sample(rng, n, taken):
    weights = [w for w, *_ in INTENTS]
    out = []
    while len(out) < n:
        _, build, domains, phrasings = rng.choices(INTENTS, weights=weights)[0]
        args = []
        for dom in domains:
            choices = [d for d in dom if d not in args]
            args.append(rng.choice(choices))
        surface = [rng.choice(SURFACE[a]) for a in args]
        utt = rng.choice(phrasings).format(*surface)
        if utt in taken:
            continue
        taken.add(utt)
        out.append({"utterance": utt, "lf": build(*args)})
    return out


# Synonym clusters for the synthetic embedding table; the first word of a
# cluster anchors it.
CLUSTERS = [
    ["state", "states"], ["river", "rivers"], ["city", "cities", "capitals"],
    ["place", "places", "mountain"],
    ["borders", "border", "bordering", "next", "adjacent", "neighboring", "neighbors",
     "neighbor"],
    ["traverses", "traverse", "run", "runs", "flow", "flows", "through", "cross", "in"],
    ["capital"], ["high", "highest", "tallest", "peak", "point", "tall", "height", "elevation"],
    ["population", "people", "populous", "populated", "residents", "inhabitants", "live"],
    ["area", "size", "big", "large"], ["density", "dense", "densely"],
    ["length", "long", "longest"],
    ["largest", "biggest", "most", "highest", "maximum", "greatest"],
    ["smallest", "least", "fewest", "shortest", "lowest", "minimum"],
    ["larger", "more", "over", "above", "greater"],
    ["smaller", "fewer", "under", "below", "less"],
    ["number", "many", "count", "how"],
    ["total", "combined", "all", "sum"],
    ["not", "no", "but"],
    ["10000000", "10", "million", "5"],
]
FUNCTION_WORDS = ["what", "which", "is", "are", "the", "of", "that", "has", "have", "there",
                  "with", "do", "does", "a", "tell", "me", "name", "list", "and", "both", "to", "than"]
ENTITY_WORDS = ["california", "texas", "oregon", "nevada", "colorado", "rio", "grande",
                "columbia", "sacramento", "austin", "salem", "whitney", "mount", "mt",
                "guadalupe", "tx", "ca"]
ENTITY_GROUPS = [["rio", "grande"], ["guadalupe"], ["whitney", "mount", "mt"],
                 ["texas", "tx"], ["california", "ca"]]


def unit(v):
    return v / np.linalg.norm(v)


def embeddings(dim, seed, spread):
    rng = np.random.default_rng(seed)
    table = {}
    for cluster in CLUSTERS:
        center = unit(rng.normal(size=dim))
        for w in cluster:
            if w in table:
                continue
            table[w] = center + spread * rng.normal(size=dim) / np.sqrt(dim) * (w != cluster[0])
    function_center = unit(rng.normal(size=dim))
    for w in FUNCTION_WORDS:
        table[w] = 0.6 * function_center + 0.5 * unit(rng.normal(size=dim))
    grouped = {w: g[0] for g in ENTITY_GROUPS for w in g}
    for w in ENTITY_WORDS:
        if w in table:
            continue
        head = grouped.get(w, w)
        if head not in table:
            table[head] = unit(rng.normal(size=dim))
        table[w] = table[head] + 0.1 * rng.normal(size=dim) / np.sqrt(dim)
    return table


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "data/toy")
    spread = float(sys.argv[2]) if len(sys.argv) > 2 else 0.15
    rng = random.Random(20191)
    taken = set()
    for name, n in [("natural.jsonl", 120), ("test.jsonl", 60)]:
        rows = sample(rng, n, taken)
        with open(out / name, "w") as f:
            for row in rows:
                f.write(json.dumps(row) + "\n")
    table = embeddings(16, 7, spread)
    with open(out / "embeddings.txt", "w") as f:
        f.write(f"{len(table)} 16\n")
        for w in sorted(table):
            f.write(w + " " + " ".join(f"{x:.6f}" for x in table[w]) + "\n")


if __name__ == "__main__":
    main()
