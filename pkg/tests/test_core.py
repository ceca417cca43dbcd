import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad, trapezoid

from conftest import spec_text
from pbiharm.core import (DomainSpec, Nonlinearity, Polynomial, SpecError, eval_F, eval_f,
                          example36, parse_polynomial, parse_spec)

CATALOG = [
    example36(),
    Nonlinearity("power_sum", {"terms": ((1.0, 3.0), (0.5, 1.5))}),
    Nonlinearity("flat_then_power", {"threshold": 1.0, "exponent": 2.5, "scale": 2.0}),
    Nonlinearity("flat_then_power", {"threshold": -0.5, "exponent": 3.0, "scale": 1.0}),
    Nonlinearity("piecewise", {"breakpoints": (-1.0, 2.0),
                               "pieces": ((-1.0,), (0.0, 1.0), (-2.0, 2.0, 0.0))}),
    Nonlinearity("polynomial", {"breakpoints": (), "pieces": ((1.0, 0.0, 3.0),)}),
]


@pytest.mark.parametrize("nl", CATALOG, ids=lambda nl: nl.kind)
def test_primitive_vanishes_at_zero(nl):
    assert nl.G(0.0) == 0.0


@pytest.mark.parametrize("nl", CATALOG, ids=lambda nl: nl.kind)
@pytest.mark.parametrize("t", [-3.0, -0.7, 0.4, 2.0, 2.5, 5.0])
def test_primitive_matches_quadrature(nl, t):
    kinks = sorted(b for b in nl.breakpoints() if min(0, t) < b < max(0, t))
    val, _ = quad(nl.g, 0.0, t, points=kinks or None, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert nl.G(t) == pytest.approx(val, rel=1e-9, abs=1e-11)


def test_example36_values():
    nl = example36()
    assert nl.g(1.0) == 0.0
    assert nl.g(6.0) == pytest.approx(2.0)
    assert nl.G(8.0) == pytest.approx(2 * 6 ** 1.5 / 3)
    assert nl.dg(2.0) == math.inf


def test_discontinuous_piecewise_rejected():
    with pytest.raises(SpecError, match="discontinuous"):
        Nonlinearity("piecewise", {"breakpoints": (1.0,), "pieces": ((0.0,), (1.0,))})


def test_power_sum_rejects_q_at_most_one():
    with pytest.raises(SpecError):
        Nonlinearity("power_sum", {"terms": ((1.0, 1.0),)})


def test_eval_f_requires_x_iff_spatial():
    nl = example36()
    assert eval_f(nl, None, 6.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        eval_f(nl, (0, 0, 0), 6.0)
    a = parse_polynomial("2; 1@1,0,0", 3)
    nls = Nonlinearity("power_sum", {"terms": ((1.0, 2.0),)}, spatial=a)
    assert eval_F(nls, (1.0, 0.0, 0.0), 2.0) == pytest.approx(3.0 * 2.0)
    with pytest.raises(ValueError):
        eval_F(nls, None, 2.0)


def test_polynomial_shell_integral_against_quadrature():
    a = parse_polynomial("1; 2@2,0,0; -1@0,1,1; 0.5@1,0,0", 3)
    c = np.array([0.2, -0.1, 0.3])

    def radial(s):
        # brute-force surface integral in spherical coordinates
        th = np.linspace(0, np.pi, 201)
        ph = np.linspace(0, 2 * np.pi, 401)
        T, P = np.meshgrid(th, ph, indexing="ij")
        pts = c + s * np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1)
        vals = a(pts) * np.sin(T)
        return trapezoid(trapezoid(vals, ph, axis=1), th) * s ** 2

    num, _ = quad(radial, 0.3, 0.9, epsabs=1e-10)
    assert a.shell_integral(c, 0.3, 0.9) == pytest.approx(num, rel=1e-4)


@settings(max_examples=25)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3),
       st.lists(st.floats(0.1, 2), min_size=3, max_size=3))
def test_box_integral_constant(lo, side):
    a = Polynomial.constant(2.5, 3)
    hi = [l + s for l, s in zip(lo, side)]
    assert a.box_integral(lo, hi) == pytest.approx(2.5 * np.prod(side), rel=1e-12)


@pytest.mark.parametrize("bad", ["", "1@1,2", "1@-1,0,0"])
def test_parse_polynomial_errors(bad):
    with pytest.raises(SpecError):
        parse_polynomial(bad, 3)


def test_domain_invariants():
    with pytest.raises(SpecError):
        DomainSpec.ball((0, 0, 0), 0.0)
    with pytest.raises(SpecError):
        DomainSpec.box((0, 0, 0), (1, 0, 1))
    assert DomainSpec.box((0, 0), (1, 2)).dim == 2


def test_parse_example36(ex36_spec):
    s = ex36_spec
    assert (s.N, s.p, s.gamma, s.delta, s.h) == (3, 2.0, 2.0, 8.0, 2.0)
    assert s.domain.shape == "ball" and s.domain.radius == 1.0
    assert s.nonlinearity.kind == "example36"
    assert s.solver.n == 200


@pytest.mark.parametrize("kwargs, match", [
    ({"p": 1.4}, "p must exceed"),
    ({"N": 4, "p": 2.0}, "p must exceed"),
    ({"gamma": 0.0}, "positive"),
    ({"h": 1.0}, "h must exceed"),
    ({"nl": "kind = bogus"}, "unknown nonlinearity"),
    ({"domain": "shape = ball\ncenter = 0,0\nradius = 1"}, "dimension"),
    ({"extra_cert": "r1 = 0.5"}, "together"),
    ({"extra_cert": "r1 = 0.5\nr2 = 0.2"}, "r1 < r2"),
])
def test_parse_spec_rejects(kwargs, match):
    with pytest.raises(SpecError, match=match):
        parse_spec(spec_text(**kwargs))


def test_parse_spec_missing_section():
    with pytest.raises(SpecError, match="missing section"):
        parse_spec("[problem]\nN = 3\np = 2\n")


def test_parse_spec_nonlinearity_kinds():
    s = parse_spec(spec_text(nl="kind = piecewise\nbreakpoints = 1\npieces = 0 | -1, 1"))
    assert s.nonlinearity.g(3.0) == pytest.approx(2.0)
    s = parse_spec(spec_text(nl="kind = power_sum\nterms = 1@3; 2@1.5\nspatial = 1; 1@1,0,0"))
    assert not s.nonlinearity.autonomous
    assert s.nonlinearity.s == 2.0


def test_readme_config_parses():
    import re
    from pathlib import Path
    text = (Path(__file__).resolve().parents[1] / "README.md").read_text()
    block = re.search(r"```ini\n(.*?)```", text, re.S).group(1)
    spec = parse_spec(block)
    assert spec.nonlinearity.kind == "example36" and spec.solver.n == 200
