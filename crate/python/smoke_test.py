"""Smoke test for the asymcon extension module.

    pip install --no-build-isolation -e crates/python
    python python/smoke_test.py
"""

import cmath
import math

import asymcon


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    abel = asymcon.Ode.abel(2)
    roots = abel.roots
    assert len(roots) == 3
    for k in range(3):
        p = cmath.rect(1 / 3, 2 * math.pi * k / 3)
        assert any(close(r, p, 1e-14) for r in roots), p

    series = asymcon.ConstantSeries(abel, 0, 1.1)
    assert close(series.a, 0.2, 1e-9), series.a
    assert series.f_at(1.1)[0] == 0

    # C_2 is conserved along a solution up to O(|x|^-2).
    x0, y0 = 20 + 60j, 0.5 + 0.1j
    k = series.constant_from_ic(x0, y0)
    samples = asymcon.rk_integrate(abel, [x0, 20 + 62j], y0, 1e-12, 1e-14)
    x1, y1 = samples[-1]
    assert close(series.constant_from_ic(x1, y1), k, 1e-4)
    assert close(series.invert(k, x1, y1 + 0.01), y1, 1e-5)

    sing = asymcon.SingularSeries(abel)
    x_sing, x_hit, digits = sing.verify(10 + 60j, 0.7 + 0.3j)
    assert close(x_sing, 9.80628 + 60.2167j, 1e-3), x_sing
    assert digits >= 6, digits

    tan = asymcon.SingularSeries(asymcon.Ode.riccati(1))
    assert close(tan.locate(0, 0), math.pi / 2, 1e-8)

    tags = asymcon.detect_regions(asymcon.Ode.linear(), [(50, 0.01), (50, 0.3), (1, 0.3)])
    assert tags == ["NearRoot(0)", "RDomain", "Unknown"], tags

    _, equilibria = asymcon.phase_field(abel, 0, -math.pi / 4, 50.0, n=3)
    assert [e[2] for e in equilibria] == ["stable", "unstable", "stable"]

    try:
        asymcon.Ode([[1, -2, 1]])
    except asymcon.AsymconError as e:
        assert str(e).startswith("MultipleRoot"), e
    else:
        raise AssertionError("double root accepted")

    print("asymcon smoke test passed")


if __name__ == "__main__":
    main()
