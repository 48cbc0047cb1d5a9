#!/usr/bin/env python3
"""Smoke test for the timarg_py extension module.

Builds nothing itself: compile the extension first with

    cargo build -p timarg-py --release

then run

    python3 python/smoke.py

The script locates the compiled shared object under target/, imports it
under the module name, and exercises every exported function with known
inputs, asserting exact answers.  Exit code 0 means every check passed.
"""

import json
import math
import sys
import tempfile
from fractions import Fraction
from pathlib import Path


def load_module():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / "libtimarg_py.so"
        for profile in ("release", "debug")
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit(
            "libtimarg_py.so not found; run `cargo build -p timarg-py --release` first"
        )
    lib = max(built, key=lambda p: p.stat().st_mtime)
    tmp = Path(tempfile.mkdtemp(prefix="timarg_py_"))
    (tmp / "timarg_py.so").symlink_to(lib)
    sys.path.insert(0, str(tmp))
    import timarg_py

    return timarg_py


def frac(s):
    return Fraction(s)


def main():
    t = load_module()

    # Patterns and symmetrisation: the checkerboard disagrees along both
    # axes and agrees along both diagonals.
    p = t.Pattern(2, [[0, 1], [1, 0]])
    assert (p.d(), p.width(), p.height()) == (2, 2, 2)
    assert p.value_at(2, 0) == 0 and p.value_at(3, 0) == 1
    assert p.transpose().rows() == [[0, 1], [1, 0]]
    spec_json = p.symmetrize(["h", "v", "plus", "minus"])
    spec = json.loads(spec_json)
    assert spec["d"] == 2 and len(spec["entries"]) == 4
    assert t.trivial_consistency(spec_json)
    cert = json.loads(t.strip_feasible(spec_json, 2))
    assert cert["kind"] == "feasible" and cert["verified"]
    cert = json.loads(t.square_feasible(spec_json, 2))
    assert cert["kind"] == "feasible" and cert["verified"]
    print("ok pattern/symmetrize/feasibility")

    # Built-in counterexamples: trivially consistent yet refuted at level 2
    # with independently replayed multipliers.
    for name in ("disagreement-nnn", "noncommuting-cycle"):
        bad = t.counterexample_spec(name)
        assert t.trivial_consistency(bad)
        cert = json.loads(t.strip_feasible(bad, 2))
        assert cert["kind"] == "infeasible", name
        assert cert["verified"], name
        assert cert["dual_multipliers"], name
    print("ok counterexamples refuted with verified multipliers")

    # Exact membership tests.  The checkerboard point is realizable; the
    # all-disagreement point is not; the noncommuting cycle tables fail the
    # three-letter test.
    anti = [["0", "1/2"], ["1/2", "0"]]
    diag = [["1/2", "0"], ["0", "1/2"]]
    third = "1/3"
    zero3 = [["0"] * 3 for _ in range(3)]
    cycle_h = [row[:] for row in zero3]
    cycle_h[0][2] = cycle_h[1][0] = cycle_h[2][1] = third
    cycle_v = [row[:] for row in zero3]
    cycle_v[0][0] = cycle_v[1][2] = cycle_v[2][1] = third
    uniform3 = [[ "1/9" ] * 3 for _ in range(3)]
    assert t.check_d2_nn([anti, anti], 2)
    assert t.check_d2_nnn(anti, anti, diag, diag)
    assert not t.check_d2_nnn(anti, anti, anti, anti)
    assert t.check_d3_nn(uniform3, uniform3)
    assert not t.check_d3_nn(cycle_h, cycle_v)
    print("ok exact membership checks")

    # Vertex libraries and exact ground-state energies.  Equal-weight
    # disagreement on both axes is minimised by the checkerboard at -1.
    lib = json.loads(t.vertex_library("d2-nnn"))
    assert len(lib["vertices"]) == 13
    ising = [["1", "-1"], ["-1", "1"]]
    value, label = t.exact_energy("d2-nn", [ising, ising])
    assert frac(value) == -2, value
    print(f"ok vertex library / exact energy (antiferromagnet -> {value} at {label})")

    # Energy bounds through the adjacency-rule encoding.  The right-step
    # rule (horizontal neighbours must step 0 -> 1, vertical free) admits
    # at best 3/2 allowed pairs per site, achieved at period 2, so the
    # minimising form is pinned to -3/2 from both sides.
    maxi, mini = t.rule_energy_forms(2, [(0, 1)], [(a, b) for a in range(2) for b in range(2)])
    bounds = json.loads(t.energy_bounds(mini, 2, 2))
    assert frac(bounds["lower"]) == frac(bounds["upper"]) == Fraction(-3, 2)
    assert not bounds["partial"] and bounds["witness_rows"] is not None
    witness = t.Pattern(2, bounds["witness_rows"])
    assert frac(witness.energy(maxi)) == Fraction(3, 2)
    print("ok adjacency-rule energy bounds (right-step value 3/2)")

    # Tiling validity and periodic search.  The full rule tiles trivially;
    # the right-step rule admits no periodic tiling at all.
    full = [(a, b) for a in range(2) for b in range(2)]
    assert t.tiling_valid(2, full, full, [[0, 1], [1, 0]], torus=True) is None
    site, pair, horizontal = t.tiling_valid(2, [(0, 1)], full, [[0, 0]], torus=False)
    assert pair == (0, 0) and horizontal
    search = json.loads(t.tiling_search(2, full, full, 1))
    assert search["witness_rows"] is not None and not search["partial"]
    search = json.loads(t.tiling_search(2, [(0, 1)], full, 3))
    assert search["witness_rows"] is None and not search["partial"]
    print("ok tiling validity / periodic search")

    # Exact linear programming with replayable certificates.
    cert = json.loads(
        t.solve_lp(
            ["1", "1"],
            [(["-1", "-2"], "ge", "-4"), (["1", "0"], "eq", "3/2")],
        )
    )
    assert cert["kind"] == "optimal" and cert["verified"]
    assert frac(cert["objective_value"]) == Fraction(11, 4)
    assert [frac(x) for x in cert["primal_point"]] == [Fraction(3, 2), Fraction(5, 4)]
    cert = json.loads(
        t.solve_lp(["0"], [(["1"], "ge", "2"), (["-1"], "ge", "0")], feasibility_only=True)
    )
    assert cert["kind"] == "infeasible" and cert["verified"]
    cert = json.loads(t.solve_lp(["1"], [], free_vars=[0]))
    assert cert["kind"] == "unbounded" and cert["verified"]
    print("ok exact LP certificates")

    # Reflection-symmetric window energies.  All-zero energies give zero;
    # the uniform window distribution is reflection invariant, a lopsided
    # point mass is not.
    assert frac(t.reflection_energy(2, 2, ["0"] * 16)) == 0
    region = [[0, 0], [1, 0], [0, 1], [1, 1]]
    uniform = {
        "d": 2,
        "region": region,
        "probs": {str(k): "1/16" for k in range(16)},
    }
    assert t.check_reflection_ti(json.dumps(uniform))
    lopsided = {"d": 2, "region": region, "probs": {"8": "1"}}
    assert not t.check_reflection_ti(json.dumps(lopsided))
    print("ok reflection window checks")

    # The piecewise affine tile system: alphabet size, curve anchors, and
    # orbit densities converging to the closed-form curve.
    assert t.kari_alphabet_size() == 2947
    tiles = json.loads(t.kari_tiles())
    assert len(tiles) == 2947
    x0, y0 = t.kari_curve_point(0.2)
    assert abs(x0) < 1e-9 and abs(y0) < 1e-9
    x1, y1 = t.kari_curve_point(0.4)
    assert abs(x1 - math.sqrt(3) / (5 * math.pi)) < 1e-9
    assert abs(y1 - 1 / 3) < 1e-9
    omega, eta = t.kari_orbit_density("3/10", 2000)
    cx, cy = t.kari_curve_point(0.3)
    assert abs(float(frac(omega)) - cx) < 5e-3
    assert abs(float(frac(eta)) - cy) < 5e-3
    print("ok tile alphabet 2947 / curve anchors / orbit densities")

    print("smoke: all checks passed")


if __name__ == "__main__":
    main()
