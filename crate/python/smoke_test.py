"""Smoke test for the orbitlab Python bindings.

Run after `maturin develop -m crates/py/Cargo.toml`, or after
`cargo build --release -p orbitlab-py` (the built library is then loaded
straight from target/).
"""

import cmath
import importlib.machinery
import importlib.util
import json
import math
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import orbitlab

        return orbitlab
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for name in ("liborbitlab.so", "liborbitlab.dylib", "orbitlab.dll"):
            path = ROOT / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("orbitlab", str(path))
                spec = importlib.util.spec_from_loader("orbitlab", loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("orbitlab not found: build it with `cargo build --release -p orbitlab-py`")


def main():
    ol = load()

    z2 = ol.PolyMap.power_map(1, 2)
    assert z2.dim == 1 and z2.degree == 2 and not z2.is_real
    y, jac = z2.iterate([0.5 + 0j], 2)
    assert abs(y[0] - 0.0625) < 1e-15 and abs(jac[0][0] - 0.5) < 1e-15

    report = ol.solve(z2, 2)
    assert len(report["points"]) == 4
    periods = sorted(o["least_period"] for o in report["orbits"])
    assert periods == [1, 1, 2], periods

    census = ol.census(z2, 8)
    assert [r["p"] for r in census["table"]["rows"]] == [2**n for n in range(1, 9)]
    coeffs = census["zeta"]["coefficients"]
    assert all(abs(c - 2**n) <= 1e-9 * 2**n for n, c in enumerate(coeffs))

    zeta = ol.zeta([1] * 6)
    assert zeta["coefficients"] == [1.0] * 7

    planar = ol.lemma2(2, 2, 2)
    assert planar["found"] == planar["expected"] == "16" and planar["all_hyperbolic"]
    assert planar["min_margin"] >= 0.5

    quad = ol.PolyMap.univariate([-2.0, 0.0, 1.0])
    assert quad.is_real
    assert len(ol.solve(quad, 3)["points"]) == 8

    split = ol.split(1, 12)
    assert len(split["plan"]["fixed_points"]) == 12 and split["persistence_count"] == 12
    assert isinstance(split["map"], ol.PolyMap)

    sched = ol.schedule("linear", 4)
    assert sched["satisfied"] and sched["p_n1"] >= 16

    elim = ol.eliminate(2, 1)
    assert elim["slice_re"] == "4*a_0*a_2^2 - a_1^2*a_2 + 2*a_1*a_2 - a_2"
    assert elim["certified"] and elim["slice_certified"]

    sample = ol.sample(trials=200, seed=3)
    assert all(h["hits"] == 0 for h in sample["report"]["lambda0_hits"])
    assert sample["report"]["controls"][0]["detected"]

    roundtrip = ol.PolyMap.from_json(json.dumps(json.loads(z2.to_json())))
    assert roundtrip.hash() == z2.hash()

    for bad in (lambda: ol.PolyMap.power_map(0, 2), lambda: ol.eliminate(2, 1, "1/2,0")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    w = cmath.exp(2j * math.pi / 3)
    assert abs(z2([w])[0] - w * w) < 1e-15
    print("orbitlab smoke test: OK")


if __name__ == "__main__":
    main()
