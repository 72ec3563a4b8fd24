"""Regenerate the bundled fixture set. Output is deterministic."""

import csv
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent
rng = random.Random(20201116)

TOPICS = [
    dict(topic_id=1, title="ibuprofen", answer="no",
         description="Can ibuprofen worsen COVID-19?",
         claim="Ibuprofen worsens COVID-19.",
         narrative="Documents discussing whether taking ibuprofen makes COVID-19 worse."),
    dict(topic_id=2, title="vitamin C", answer="no",
         description="Can vitamin C cure COVID-19?",
         claim="Vitamin C cures COVID-19.",
         narrative="Documents about vitamin C as a treatment for COVID-19."),
    dict(topic_id=3, title="face masks", answer="yes",
         description="Do face masks reduce the spread of COVID-19?",
         claim="Face masks reduce the spread of COVID-19.",
         narrative="Documents on whether wearing face masks limits transmission."),
    dict(topic_id=4, title="hydroxychloroquine", answer="no",
         description="Can hydroxychloroquine treat COVID-19?",
         claim="Hydroxychloroquine treats COVID-19.",
         narrative="Documents on hydroxychloroquine as a COVID-19 therapy."),
    dict(topic_id=5, title="garlic", answer="no",
         description="Does eating garlic prevent COVID-19?",
         claim="Eating garlic prevents COVID-19.",
         narrative="Documents about garlic as protection against the virus."),
]

SUBJECT = {1: "Ibuprofen", 2: "Vitamin C", 3: "Face masks", 4: "Hydroxychloroquine", 5: "Garlic"}
EFFECT = {
    1: "worsens COVID-19 symptoms",
    2: "cures COVID-19",
    3: "reduce the spread of COVID-19",
    4: "treats COVID-19 patients",
    5: "prevents COVID-19 infection",
}

SUPPORT = [
    "A new study shows that {s} {e}.",
    "Doctors confirmed that {s} {e}.",
    "Researchers found that {s} {e} in most cases.",
    "The trial proves {s} is effective.",
]
REFUTE = [
    "There is no evidence that {s} {e}.",
    "Experts say the claim that {s} {e} is a myth.",
    "The rumor is false and {s} does not work this way.",
    "Health agencies debunked reports about {s}.",
]
FILLER = [
    "The outbreak has changed daily life in many countries.",
    "Hospitals continue to report new admissions every week.",
    "Officials urged residents to follow local guidance.",
    "The report was published after a long review process.",
    "Many readers asked questions about the pandemic.",
    "Scientists are still collecting data on the virus.",
    "Pharmacies saw high demand during the first months.",
    "The article was updated with comments from clinicians.",
]

DOMAINS = [
    ("https://www.cdc.gov", "gov"), ("https://www.nih.gov", "gov"),
    ("https://med.stanford.edu", "edu"), ("https://www.harvard.edu", "edu"),
    ("https://www.who.org", "org"), ("https://www.healthline.org", "org"),
    ("https://www.dailynews.com", "com"), ("https://www.wellnessblog.com", "com"),
    ("https://www.rumormill.net", "net"), ("https://www.bbc.co.uk", "other"),
]

STYLE = "<style>body{margin:0} .nav{color:red} p{line-height:1.4}</style>"


def page(title, sentences, css_rules, inline):
    rules = " ".join(f".c{i}{{padding:{i}px}}" for i in range(css_rules))
    style = f'<p style="color:#333">' if inline else "<p>"
    paras = "".join(f"{style}{s}</p>" for s in sentences)
    return (f"<html><head><title>{title}</title>{STYLE}<style>{rules}</style>"
            f"<script>var x = 'ignored text';</script></head>"
            f"<body><nav class=\"nav\">Home | News</nav><h1>{title}</h1>{paras}"
            f"<footer>Copyright &copy; 2020</footer></body></html>")


docs, qrels, stance = [], [], []
n = 0
for t in TOPICS:
    tid = t["topic_id"]
    s, e = SUBJECT[tid], EFFECT[tid]
    for k in range(9):
        n += 1
        doc_id = f"doc{n:03d}"
        supports = k % 3 != 2 if t["answer"] == "yes" else k % 3 == 0
        lead = rng.sample(FILLER, 2)
        core = [rng.choice(SUPPORT if supports else REFUTE).format(s=s, e=e) for _ in range(2)]
        tail = rng.sample(FILLER, 2)
        sentences = lead + core + tail
        base, _ = DOMAINS[(n * 7) % len(DOMAINS)]
        url = f"{base}/articles/{doc_id}"
        if n == 13:
            url = "not a url"
        html = page(f"{s} and COVID-19", sentences, rng.randint(0, 12), k % 2 == 0)
        docs.append(dict(doc_id=doc_id, url=url, html=html, published_date="2020-04-01"))
        useful = 1 if k < 7 else 0
        correct_stance = supports == (t["answer"] == "yes")
        credible = 1 if base.endswith((".gov", ".edu", ".org")) else 0
        qrels.append((tid, doc_id, useful,
                      str(credible) if useful else "-",
                      str(int(correct_stance)) if useful else "-"))
        if tid <= 3:
            agree = rng.uniform(0.55, 0.9) if supports else rng.uniform(0.02, 0.2)
            disagree = rng.uniform(0.02, 0.3) if supports else rng.uniform(0.5, 0.9)
            disagree = min(disagree, 1 - agree)
            stance.append(dict(topic_id=tid, doc_id=doc_id, p_disagree=round(disagree, 4),
                               p_agree=round(agree, 4),
                               p_neutral=round(1 - round(agree, 4) - round(disagree, 4), 4)))

for k in range(5):
    n += 1
    doc_id = f"doc{n:03d}"
    sentences = rng.sample(FILLER, 4)
    base, _ = DOMAINS[(n * 3) % len(DOMAINS)]
    html = page("Pandemic update", sentences, rng.randint(0, 5), False)
    if k == 4:
        html = "<html><body><div>&nbsp;</div></body></html>"
    docs.append(dict(doc_id=doc_id, url=f"{base}/news/{doc_id}", html=html))

assert len(docs) == 50

with open(OUT / "corpus.jsonl", "w") as f:
    for d in docs:
        f.write(json.dumps(d, sort_keys=True) + "\n")
with open(OUT / "topics.jsonl", "w") as f:
    for t in TOPICS:
        f.write(json.dumps(t, sort_keys=True) + "\n")
with open(OUT / "qrels.txt", "w") as f:
    for row in qrels:
        f.write(" ".join(str(c) for c in row) + "\n")
with open(OUT / "stance.jsonl", "w") as f:
    for r in stance:
        f.write(json.dumps(r, sort_keys=True) + "\n")

pagerank = [
    ("bbc.co.uk", 28, 7.21),
    ("cdc.gov", 312, 7.49),
    ("dailynews.com", 90412, 3.9),
    ("harvard.edu", 220, 7.62),
    ("healthline.org", 2800, 5.55),
    ("nih.gov", 410, 7.3),
    ("rumormill.net", None, None),
    ("stanford.edu", 150, 7.7),
    ("wellnessblog.com", 812345, 2.2),
    ("who.org", 75, 6.98),
]
with open(OUT / "pagerank.tsv", "w") as f:
    for dom, rank, dec in pagerank:
        if rank is None:
            f.write(f"{dom}\tunknown\tunknown\tunknown\t1600000000\n")
        else:
            f.write(f"{dom}\t{rank}\t{int(dec + 0.5)}\t{dec}\t1600000000\n")

# Credibility training pages with precomputed features; labels follow the
# domain category with a little noise.
tld_label = {"gov": (4, 5), "edu": (4, 5), "org": (3, 5), "com": (1, 4), "net": (1, 2), "other": (2, 5)}
with open(OUT / "training.csv", "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["url", "rank", "label_raw", "css_definitions", "text_readability", "pr_rank",
                "page_rank_integer", "page_rank_decimal", "toplevel_domain"])
    for i in range(60):
        tld = ["gov", "edu", "org", "com", "net", "other"][i % 6]
        lo, hi = tld_label[tld]
        label = rng.randint(lo, hi)
        credible = label >= 4
        dec = round(rng.uniform(5.0, 8.5) if credible else rng.uniform(0.5, 4.5), 2)
        known = i % 7 != 3
        w.writerow([f"https://site{i}.example.{tld if tld != 'other' else 'co.uk'}/page",
                    i + 1, label,
                    rng.randint(0, 40) if credible else rng.randint(20, 120),
                    round(rng.uniform(8, 14) if credible else rng.uniform(3, 9), 3),
                    rng.randint(10, 5000) if (known and credible) else (rng.randint(50000, 900000) if known else "unknown"),
                    int(dec + 0.5) if known else "unknown",
                    dec if known else "unknown",
                    tld])
