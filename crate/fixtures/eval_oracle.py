"""Reference evaluation of run files against the combined fixture qrels.

usage: eval_oracle.py QRELS RUN_DIR OUT_JSON RUN_ID...

Writes {run_id: {mapping: mean}} for the nine ad-hoc mappings (runs named
adhoc_*) or binary.useful-incorrect Rprec (other runs).
"""

import json
import math
import sys
from collections import defaultdict


def load_qrels(path):
    q = defaultdict(dict)
    for line in open(path):
        cols = line.split()
        if not cols:
            continue
        t, d, useful, cred, corr = cols
        flag = lambda v: None if v in ("-", "-1", "unjudged") else int(v)
        q[int(t)][d] = (int(useful), flag(cred), flag(corr))
    return q


def load_run(path):
    rows = defaultdict(list)
    for line in open(path):
        t, _, d, rank, score, _ = line.split()
        rows[int(t)].append((int(rank), d))
    return {t: [d for _, d in sorted(r)] for t, r in rows.items()}


U, CR, CO = 0, 1, 2


def holds(aspect, l):
    if aspect == U:
        return l[0] == 1
    v = l[aspect]
    return v is not None and v > 0


def conj(*aspects):
    return lambda l: [int(all(holds(a, l) for a in aspects))]


def per_aspect(*aspects):
    return lambda l: [int(holds(a, l)) for a in aspects]


def graded(correct):
    return lambda l: [1 + int(holds(CR, l)) if l[0] == 1 and l[2] == correct else 0]


MAPPINGS = [
    ("2aspects.correct-credible", "cam", per_aspect(CO, CR)),
    ("2aspects.useful-credible", "cam", per_aspect(U, CR)),
    ("3aspects", "cam", per_aspect(U, CO, CR)),
    ("binary.useful", "ndcg", conj(U)),
    ("binary.useful-correct", "ndcg", conj(U, CO)),
    ("binary.useful-correct-credible", "ndcg", conj(U, CO, CR)),
    ("binary.useful-credible", "ndcg", conj(U, CR)),
    ("graded.harmful-only", "compat", graded(0)),
    ("graded.helpful-only", "compat", graded(1)),
]
RPREC = ("binary.useful-incorrect", "rprec",
         lambda l: [int(l[0] == 1 and l[2] is not None and l[2] == 0)])


def ap(ranking, rel):
    r = sum(1 for v in rel.values() if v > 0)
    if r == 0:
        return None
    hits, s = 0, 0.0
    for i, d in enumerate(ranking):
        if rel.get(d, 0) > 0:
            hits += 1
            s += hits / (i + 1)
    return s / r


def ndcg(ranking, gains, depth=1000):
    ideal = sorted((g for g in gains.values() if g > 0), reverse=True)
    if not ideal:
        return None
    dcg = lambda gs: sum(g / math.log2(i + 2) for i, g in enumerate(gs[:depth]))
    return dcg([gains.get(d, 0) for d in ranking]) / dcg(ideal)


def rbo(a, b, p, depth):
    total = 0.0
    for d in range(1, depth + 1):
        total += p ** (d - 1) * len(set(a[:d]) & set(b[:d])) / d
    return (1 - p) * total


def compat(ranking, gains, p=0.95, residual=1e-6):
    pos = {d: i for i, d in enumerate(ranking)}
    ideal = [d for d, g in gains.items() if g > 0]
    if not ideal:
        return None
    ideal.sort(key=lambda d: (-gains[d], pos.get(d, math.inf), d))
    depth = math.ceil(math.log(residual) / math.log(p))
    return rbo(ranking, ideal, p, depth) / rbo(ideal, ideal, p, depth)


def rprec(ranking, rel):
    r = sum(1 for v in rel.values() if v > 0)
    if r == 0:
        return None
    return sum(1 for d in ranking[:r] if rel.get(d, 0) > 0) / r


def evaluate(run, qrels, mapping):
    _, measure, rule = mapping
    values = []
    for t in sorted(set(run) & set(qrels)):
        labels = {d: rule(l) for d, l in qrels[t].items()}
        ranking = run[t]
        if measure == "cam":
            k = len(next(iter(labels.values())))
            aps = [ap(ranking, {d: v[j] for d, v in labels.items()}) for j in range(k)]
            v = None if all(a is None for a in aps) else sum(a or 0.0 for a in aps) / k
        else:
            gains = {d: v[0] for d, v in labels.items()}
            v = {"ndcg": ndcg, "compat": compat, "rprec": rprec}[measure](ranking, gains)
        if v is not None:
            values.append(v)
    return sum(values) / len(values) if values else 0.0


def main():
    qrels_path, run_dir, out_path, *runs = sys.argv[1:]
    qrels = load_qrels(qrels_path)
    out = {}
    for run_id in runs:
        run = load_run(f"{run_dir}/{run_id}.trec")
        maps = MAPPINGS if run_id.startswith("adhoc_") else [RPREC]
        out[run_id] = {m[0]: evaluate(run, qrels, m) for m in maps}
    with open(out_path, "w") as f:
        json.dump(out, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
