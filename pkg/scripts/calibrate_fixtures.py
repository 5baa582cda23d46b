"""Pick a (noise, seed) per synthetic class so its exemplar lands in the class's
symptom domain, maximizing distance to the nearest domain edge.

Prints a replacement for ``EXEMPLARS`` in ``wscec/synthetic.py``.

    python scripts/calibrate_fixtures.py [--seeds 40]
"""
import argparse
import math

from wscec.classifier import TRUTH_DOMAIN, Domain, select_b, SymptomDomainPartition
from wscec.config import WscecParams
from wscec.errors import WscecError
from wscec.features import feature_extract
from wscec.synthetic import EXEMPLARS, STANDARD, synthetic_beat

NOISE_GRID = (0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.1, 0.12, 0.15, 0.2, 0.25)


def margin(p, domain, b):
    """Distance from p to the boundary of its domain rectangle (log-ish in cur2)."""
    c1, c2 = p.cur1, p.cur2
    edges1 = {
        Domain.NORMAL: (25, b), Domain.ATRIAL: (25, 90),
        Domain.VENTRICULAR: (10, 25), Domain.BUNDLE_BRANCH: (0, 10),
    }[domain]
    m1 = min(c1 - edges1[0], edges1[1] - c1) / (edges1[1] - edges1[0])
    if domain is Domain.NORMAL:
        m2 = (25 - c2) / 25
    elif domain is Domain.ATRIAL:
        m2 = (c2 - 25) / 25
    else:
        m2 = math.inf
    return min(m1, m2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=40)
    args = ap.parse_args()
    params = WscecParams()
    b = select_b(STANDARD.beat(), params)
    part = SymptomDomainPartition(b)
    print(f"# b = {b:.3f}")
    for label in EXEMPLARS:
        want = TRUTH_DOMAIN[label]
        best = None
        hits = 0
        total = 0
        for noise in NOISE_GRID:
            for seed in range(args.seeds):
                total += 1
                try:
                    p = feature_extract(synthetic_beat(label, noise, seed), params, b).dispersion
                except WscecError:
                    continue
                if part.domain(p) is not want:
                    continue
                hits += 1
                score = margin(p, want, b)
                if best is None or score > best[0]:
                    best = (score, noise, seed, p)
        if best is None:
            print(f"# {label.name}: no exemplar found in {want.value}")
            continue
        score, noise, seed, p = best
        print(f"    L.{label.name}: SyntheticSpec(L.{label.name}, {noise}, {seed}),"
              f"  # {want.value} cur=({p.cur1:.2f}, {p.cur2:.2f}) margin={score:.3f} hit-rate={hits}/{total}")


if __name__ == "__main__":
    main()
