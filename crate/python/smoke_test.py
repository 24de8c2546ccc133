"""Smoke test for the `kikuchi` extension module.

Build and stage the module first:

    cargo build --release -p kikuchi-py --features extension-module
    cp target/release/libkikuchi.so python/kikuchi.so
    python3 python/smoke_test.py
"""

import itertools
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import kikuchi  # noqa: E402


def signs(k, mask):
    return [-1 if mask >> i & 1 else 1 for i in range(k)]


def main():
    fam = kikuchi.MatchingFamily(5, 3, [[[0, 1, 2]], [[0, 1, 3]]])
    assert (fam.n, fam.k, fam.m) == (5, 2, 2)
    assert kikuchi.MatchingFamily.from_text(fam.to_text()) == fam

    dec = kikuchi.decompose(fam, 1)
    assert dec["heavy_pairs"] == [[0, 1]]
    assert dec["bipartite"] == [[[2, 0]], [[3, 0]]]

    rnd = kikuchi.MatchingFamily.random(12, 3, 3, 4, seed=5)
    for mask in range(1 << rnd.k):
        b = signs(rnd.k, mask)
        num, den = rnd.brute_force_val(b)
        value = rnd.m * num / den
        cert = kikuchi.refute_3xor(rnd, b)
        assert cert["sound"] and cert["bound"] * (1 + cert["slack"]) + 1e-9 >= value
        comb = kikuchi.combine(rnd, b, 2)
        assert comb["bound"] * (1 + comb["slack"]) + 1e-9 >= num / den

    padded = kikuchi.Ldc.hadamard(3, padded=True)
    report = padded.verify()
    assert report["pass"] and report["min_bias"] == 1.0
    summary = kikuchi.expectation_over_b("combine", padded.family, d=2)
    assert summary["mean_value"] == 1.0 and summary["mean_bound"] >= 1.0

    wldc = padded.wldc_reduction()
    assert wldc["guarantee_holds"]
    assert all(c is None or c["gkst"] for c in (wldc["c2"], wldc["c3"]))

    assert kikuchi.binomial_ratio(8, 4, 2)[:2] == (3, 35)

    try:
        kikuchi.refute_3xor(kikuchi.MatchingFamily.random(12, 3, 3, 4, seed=1), [1, 1, 1], ell=4)
    except kikuchi.InfeasibleError as e:
        assert "derived clause" in str(e)
    else:
        raise AssertionError("expected InfeasibleError")

    suites = kikuchi.verify(["sandwich", "decomposition"], seed=1, trials=20)
    assert all(not s["failures"] and s["checks"] > 0 for s in suites)

    words = [padded.encode(m) for m in range(8)]
    for a, b in itertools.combinations(range(8), 2):
        assert [x ^ y for x, y in zip(words[a], words[b])] == words[a ^ b]

    print(f"kikuchi {kikuchi.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
