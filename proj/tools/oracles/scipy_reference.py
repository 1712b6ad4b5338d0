"""Reference statistics from scipy for the C++ test-suite.

    python3 tools/oracles/scipy_reference.py > tests/fixtures/scipy_reference.json

Samples are stored alongside the results so the C++ side never needs numpy.
"""
import json

import numpy as np
import scipy
from scipy import stats


def chain_lengths(rng, n, mean):
    # Skewed integer samples in 1..15, shaped like chain lengths.
    x = np.clip(np.round(rng.exponential(mean, n)) + 1, 1, 15)
    return [int(v) for v in x]


def main():
    rng = np.random.default_rng(20240601)
    shapiro = []
    for n in (3, 4, 5, 7, 11, 12, 20, 35, 50, 120, 500, 1000):
        sample = [round(float(v), 6) for v in rng.normal(10.0, 3.0, n)]
        shapiro.append({"sample": sample})
    for n, mean in ((30, 3.0), (200, 5.0), (1000, 6.0)):
        shapiro.append({"sample": chain_lengths(rng, n, mean)})
    shapiro.append({"sample": [round(float(v), 6) for v in rng.exponential(1.0, 60)]})
    shapiro.append({"sample": [1, 2, 3]})
    shapiro.append({"sample": [1, 1, 2]})
    for case in shapiro:
        w, p = stats.shapiro(case["sample"])
        case["w"], case["p"] = float(w), float(p)

    mwu = []
    pairs = [(chain_lengths(rng, 50, 4.0), chain_lengths(rng, 60, 6.0)),
             (chain_lengths(rng, 300, 3.0), chain_lengths(rng, 300, 3.5)),
             (chain_lengths(rng, 1000, 5.0), chain_lengths(rng, 999, 12.0)),
             ([1, 1, 1], [2, 2, 2]),
             ([3, 3, 4, 4, 5], [3, 4, 4, 5, 5, 6, 15]),
             ([15] * 40, [15] * 39 + [14])]
    for a, b in pairs:
        r = stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
        mwu.append({"a": a, "b": b, "u": float(r.statistic), "p": float(r.pvalue), "method": "asymptotic"})
    for n1, n2 in ((3, 4), (5, 5), (8, 8), (2, 40), (8, 120)):
        a = [round(float(v), 9) for v in rng.normal(0.0, 1.0, n1)]
        b = [round(float(v), 9) for v in rng.normal(0.4, 1.0, n2)]
        r = stats.mannwhitneyu(a, b, alternative="two-sided", method="exact")
        mwu.append({"a": a, "b": b, "u": float(r.statistic), "p": float(r.pvalue), "method": "exact"})

    skew = []
    for _ in range(4):
        s = chain_lengths(rng, 200, 4.0)
        skew.append({"sample": s, "g1": float(stats.skew(s, bias=True))})

    kl = []
    for counts in ([1] * 15, [0] * 14 + [7], [5, 3, 2, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 88], list(range(1, 16))):
        p = np.array(counts, dtype=float)
        kl.append({"counts": counts, "kl": float(stats.entropy(p / p.sum(), np.full(15, 1 / 15)))})

    print(json.dumps({"scipy_version": scipy.__version__, "shapiro": shapiro, "mannwhitneyu": mwu,
                      "skewness": skew, "kl_to_uniform": kl}))


if __name__ == "__main__":
    main()
