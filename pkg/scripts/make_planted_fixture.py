"""Regenerate the 20-chunk planted fixture used by the hybrid-coverage check.

Dense vectors are hand-placed: the query is e0 and every chunk vector has a
chosen cosine with it, so dense ranks are fixed by construction. BM25 ranks
follow from which chunks share query words.
"""

import json
import math
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "maternal_rag" / "data"
DIM = 8
QUERY = "anemia tablet timing"

# (id, text, cosine with the query vector, role)
CHUNKS = [
    ("p-lex", "IFA protocol 4B: anemia tablet timing is bedtime dosing for clinic staff.", -0.05, "lexical_only"),
    ("p-sem", "Swallow iron pills between meals with lemon water for better absorption.", 0.97, "semantic_only"),
    ("p-dd1", "Iron supplements work best on an empty stomach.", 0.93, "dense_decoy"),
    ("p-dd2", "Vitamin C improves absorption of iron from food.", 0.90, "dense_decoy"),
    ("p-dd3", "Avoid tea and coffee close to iron pills.", 0.87, "dense_decoy"),
    ("p-dd4", "Folic acid and iron are given together in pregnancy.", 0.84, "dense_decoy"),
    ("p-ld1", "A tablet computer can help health workers record visits.", -0.30, "lexical_decoy"),
    ("p-ld2", "Timing of the first antenatal visit matters.", -0.20, "lexical_decoy"),
    ("p-ld3", "Sickle cell anemia screening is offered in some districts.", -0.25, "lexical_decoy"),
    ("p-ld4", "Write the tablet count on the mother and child card.", -0.35, "lexical_decoy"),
    ("p-f01", "Walking every day keeps the body active.", 0.60, "filler"),
    ("p-f02", "Green leafy vegetables are rich in folate.", 0.56, "filler"),
    ("p-f03", "Jaggery and dates are traditional snacks.", 0.52, "filler"),
    ("p-f04", "Drink plenty of clean water in summer.", 0.48, "filler"),
    ("p-f05", "Pulses and lentils provide protein.", 0.44, "filler"),
    ("p-f06", "Keep vaccination cards in a safe place.", 0.40, "filler"),
    ("p-f07", "Sleep on the left side in late pregnancy.", 0.36, "filler"),
    ("p-f08", "Wash hands before cooking and eating.", 0.32, "filler"),
    ("p-f09", "Plan transport for delivery in advance.", 0.28, "filler"),
    ("p-f10", "Mosquito nets reduce the risk of malaria.", 0.24, "filler"),
]


def vector(cos: float, axis: int) -> list[float]:
    v = [0.0] * DIM
    v[0] = cos
    v[axis] = math.sqrt(1.0 - cos * cos)
    return v


def main():
    vectors = {QUERY: vector(1.0, 1)}
    with open(DATA / "planted_corpus.jsonl", "w", encoding="utf-8") as f:
        for i, (cid, text, cos, role) in enumerate(CHUNKS):
            vectors[text] = vector(cos, 1 + i % (DIM - 1))
            rec = {"id": cid, "text": text, "source_doc": "planted", "language": "en", "section_title": role}
            f.write(json.dumps(rec) + "\n")
    meta = {"query": QUERY, "lexical_only": "p-lex", "semantic_only": "p-sem", "vectors": vectors}
    (DATA / "planted_vectors.json").write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
