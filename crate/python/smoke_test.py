"""Smoke test for the chaoslab extension module.

Build and run:
    cargo build -p chaoslab-py --features extension-module --release
    cp target/release/libchaoslab.so python/chaoslab.so
    python3 python/smoke_test.py
"""

import itertools
import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import chaoslab  # noqa: E402


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def normalized(p, plus):
    return math.sqrt((1 - p) / p) if plus else -math.sqrt(p / (1 - p))


def phi(x):
    return 0.5 * math.erfc(-x / math.sqrt(2))


def main():
    # symmetric +-1: the CDF gap is largest just above -1
    k = chaoslab.Kernel(1, 1, [([1], 1.0)])
    d = chaoslab.distances(k, chaoslab.Model.symmetric(1))
    close(d["kolmogorov"], 0.5 - phi(-1.0), 1e-12)

    c = chaoslab.constants(1)
    assert c["gamma"] == 2.0
    close(c["K1"], 1.5, 1e-12)
    close(c["K2"], 0.5, 1e-12)
    assert [chaoslab.constants(m)["gamma"] for m in (2, 3)] == [72.0, 7920.0]

    # biased product: fourth moment 3 recomputed by hand
    f, model = chaoslab.biased(2)
    p = model.probs[0]
    fourth = 0.0
    for signs in itertools.product([False, True], repeat=2):
        w = math.prod(p if s else 1 - p for s in signs)
        fourth += w * math.prod(normalized(p, s) for s in signs) ** 4
    close(fourth, 3.0, 1e-12)
    close(chaoslab.fourth_moment(f, model), 3.0, 1e-12)
    close(chaoslab.fourth_moment(f, model, "factorized"), 3.0, 1e-12)

    # table values agree with the defining sum
    model = chaoslab.Model([0.3, 0.6, 0.45])
    g = chaoslab.Kernel(2, 3, [([1, 2], 0.4), ([2, 3], -0.7)])
    vals = chaoslab.values(g, model)
    for omega, v in enumerate(vals):
        ys = [normalized(model.probs[i], omega >> i & 1) for i in range(3)]
        close(v, 2 * (0.4 * ys[0] * ys[1] - 0.7 * ys[1] * ys[2]), 1e-12)

    gn = g.normalized()
    close(gn.second_moment(), 1.0, 1e-12)
    b = chaoslab.bounds(gn, model)
    dist = chaoslab.distances(gn, model)
    assert dist["wasserstein"] <= b["wasserstein"]
    assert dist["kolmogorov"] <= b["kolmogorov"]

    kern, sym, theta = chaoslab.symmetric(2, 4)
    close(chaoslab.fourth_moment(kern, sym, "symmetric-fast"), 3.0, 1e-12)
    assert 0.0 < theta < 1.0

    rep = chaoslab.dejong(gn, model)
    close(rep["rho_squared"], 4 * gn.sup_influence(), 1e-12)

    text = gn.to_json(model)
    back, m2 = chaoslab.Kernel.from_json(text)
    assert back.entries() == gn.entries()
    assert m2.probs == model.probs
    assert json.loads(text)["m"] == 2

    try:
        chaoslab.Kernel(2, 3, [([2, 2], 1.0)])
    except ValueError:
        pass
    else:
        raise AssertionError("repeated index accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
