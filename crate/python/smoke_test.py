"""Smoke test for the compiled extension.

Build it first:

    cargo build --release -p bosebox-py --features extension-module

The script copies target/release/libbosebox.so (or the debug build) next to
a temporary `bosebox.so` and imports it.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def load():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libbosebox.so"
        if lib.exists():
            tmp = Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "bosebox.so")
            sys.path.insert(0, str(tmp))
            import bosebox

            return bosebox
    sys.exit("extension not built; see the module docstring")


def main():
    bb = load()

    pot = bb.Potential.soft_sphere(1.0, 1.0, 2.0)
    a = pot.scattering_length()
    assert abs(a - (1.0 - math.tanh(1.0))) < 1e-6, a
    rep = bb.scatter(pot)
    assert abs(rep["a"] - rep["a_integral"]) < 1e-6 * a

    assert abs(bb.bessel_k(2, 1.0) - 1.6248388986351774828) < 1e-10

    sol = bb.solve_twobody(pot, 2, 4.0, 8, tol=1e-10)
    assert sol.eigenvalue > 0.0
    assert len(sol.values()) == 8 ** 4
    props = sol.properties(a)
    assert props["exchange_asymmetry"] < 1e-12
    pos = sol.constant_term(2.0)
    spec = sol.constant_term(2.0, route="spectral")
    assert abs(pos["total"] - spec["total"]) <= pos["truncation_estimate"] + spec["truncation_estimate"] + 1e-10

    free = bb.solve_fock(bb.Potential.soft_sphere(1.0, 1.0, 0.0), 3, 4.0, 2, 7)
    assert free["depletion"] == 0.0

    t, _ = bb.minimize_occupancy(5.0, 1.0, 20.0, 1.0, 0.0)
    assert t == 5.0

    record = bb.execute_config('modules = ["scatter"]\n')
    assert "scatter" in record["stages"]

    try:
        bb.Potential.soft_sphere(1.0, -1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative range accepted")

    print("smoke test passed: a = %.9f, lambda = %.6f" % (a, sol.eigenvalue))


if __name__ == "__main__":
    main()
