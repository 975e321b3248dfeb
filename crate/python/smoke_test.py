#!/usr/bin/env python3
"""Smoke test for the driftlab_py extension module.

Builds nothing itself: it looks for the compiled cdylib under target/,
copies it next to a temporary directory under the importable name, and
drives a handful of closed-form checks through the Python surface.

Usage:  cargo build -p driftlab-py && python3 python/smoke_test.py
"""

import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate_cdylib() -> pathlib.Path:
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libdriftlab_py.so", "libdriftlab_py.dylib", "driftlab_py.dll")
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit("driftlab_py cdylib not found; run `cargo build -p driftlab-py` first")


def import_module():
    src = locate_cdylib()
    stage = tempfile.mkdtemp(prefix="driftlab-py-")
    suffix = ".pyd" if src.suffix == ".dll" else ".so"
    shutil.copy2(src, pathlib.Path(stage) / f"driftlab_py{suffix}")
    sys.path.insert(0, stage)
    import driftlab_py

    return driftlab_py


def close(a: float, b: float, rel: float = 1e-10) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def main() -> None:
    lab = import_module()

    # Special functions against closed forms.
    for s in (0.01, 0.1, 1.0, 5.0, 20.0):
        oracle = math.sqrt(math.pi / (2.0 * s)) * math.exp(-s)
        assert close(lab.bessel_k(0.5, s), oracle), f"K_1/2({s})"
    assert close(lab.gamma(5.0), 24.0, 1e-12)
    assert close(lab.gamma(0.5), math.sqrt(math.pi), 1e-12)

    # Kernel handles: grammar constructor, closed-form values, constants.
    k = lab.Kernel("laplace(tau=1)")
    assert k.dim() == 1
    assert close(k.eval([1.0]), math.exp(-1.0), 1e-12)
    assert lab.Kernel.laplace(2.0, 1).constants() == (4.0, 2.0, 1.0, 4.0)
    assert lab.Kernel.gaussian(0.5, 3).constants() == (0.25, 1.0, 1.0, 0.0)
    m = lab.Kernel.matern(1.5, 0.7, 2)
    c1, c2, lam0, lam1 = m.constants()
    assert c1 == lam1 == 0.7 * 0.7 and c2 == 2 + 2 * 1.5 and lam0 == 1.0

    # Field axioms on an asymmetric pair of measures.
    p = lab.Measure([[-1.0], [1.0]], [0.5, 0.5])
    q = lab.Measure([[0.3], [2.0], [-0.4]], [0.2, 0.5, 0.3])
    for x in ([0.0], [0.7], [-2.2]):
        fwd = lab.drift(k, p, q, x)
        bwd = lab.drift(k, q, p, x)
        assert all(abs(a + b) <= 1e-12 for a, b in zip(fwd, bwd)), "antisymmetry"
        assert all(v == 0.0 for v in lab.drift(k, p, p, x)), "self-field"
    assert any(abs(v) > 0.0 for v in lab.drift(k, p, q, [0.5])), "nonzero witness"

    # Barycenter of a point mass sits on the atom with kernel-value mass.
    a, u = lab.barycenter(k, lab.Measure.dirac([2.0]), [0.0])
    assert a == [2.0] and close(u, math.exp(-2.0), 1e-12)

    # Mass escape: the satellite keeps eps outside every fixed ball and
    # the defect estimate sees only the surviving 1 - eps fraction.
    far = p.satellite(0.3, [32.0])
    assert far.tail_mass_beyond(5.0) == 0.3
    c_hat, dispersion = lab.defect(k, p, far)
    assert abs(c_hat - 0.7) <= 1e-3 and dispersion <= 1e-3, (c_hat, dispersion)

    # Overlap scalar: linear in its argument, separates scaled copies.
    z_p = lab.overlap(k, p, p)
    z_half = lab.overlap(k, p, p.scaled(0.5))
    assert close(z_half, 0.5 * z_p, 1e-12)
    assert z_half < z_p
    assert close(z_p, 0.5 * (1.0 + math.exp(-2.0)), 1e-12)

    # Measure grammar round trip through the discretizer.
    heavy = lab.Measure.parse("powerlaw(m=3)", dim=1)
    assert close(heavy.total_mass(), 1.0, 1e-9)
    assert len(heavy) > 100

    print("driftlab_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
