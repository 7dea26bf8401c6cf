import math

import pytest
from hypothesis import given, strategies as st

from critdet import DomainError
from critdet import lattice as L
from critdet import moduli as M

PS = [1.1, 1.5, 2.0, 2.5, 3.0, 6.0, 10.0]


def test_basis_basics():
    b = L.LatticeBasis((1.0, 0.0), (0.3, 2.0))
    assert b.det == 2.0
    assert b.point(2, -1) == (1.7, -2.0)
    assert b.scaled(2.0).det == pytest.approx(8.0)
    with pytest.raises(DomainError):
        L.LatticeBasis((1.0, 2.0), (2.0, 4.0))


@given(st.floats(-3, 3), st.floats(0.2, 3), st.integers(-5, 5))
def test_gauss_reduction_preserves_lattice(x, y, k):
    b = L.LatticeBasis((1.0, 0.0), (x + k, y))
    r = b.reduced()
    assert r.det == pytest.approx(b.det, rel=1e-9)
    n1 = r.v1[0] ** 2 + r.v1[1] ** 2
    n2 = r.v2[0] ** 2 + r.v2[1] ** 2
    dot = r.v1[0] * r.v2[0] + r.v1[1] * r.v2[1]
    assert n1 <= n2 * (1 + 1e-12)
    assert abs(dot) <= 0.5 * n1 * (1 + 1e-9)


def test_region_gauge():
    D = L.RegionDp(3.0)
    assert D.gauge((1.0, 0.0)) == 1.0
    assert D.gauge((0.5, 0.5)) == pytest.approx(0.5 * 2 ** (1 / 3))
    assert D.contains((0.5, 0.5)) and not D.contains((1.0, 0.0))
    assert D.gauge((1e-200, 0.0)) == 1e-200
    with pytest.raises(DomainError):
        L.RegionDp(1.0)


def test_integer_lattice_is_admissible_for_every_p():
    z2 = L.LatticeBasis((1.0, 0.0), (0.0, 1.0))
    for p in PS:
        assert L.is_admissible(z2, L.RegionDp(p))
        assert L.lattice_minimum(z2, p) == 1.0
    assert not L.is_admissible(z2.scaled(0.9), L.RegionDp(2.0))


@pytest.mark.parametrize("p", PS)
@pytest.mark.parametrize("kind", ["zero", "one"])
def test_critical_lattices_match_endpoint_values(p, kind):
    b = L.construct_critical_lattice(p, kind)
    target = M.delta0(p) if kind == "zero" else M.delta1(p)
    assert b.det == pytest.approx(target, abs=1e-11)
    assert L.is_admissible(b, L.RegionDp(p))
    assert L.lattice_minimum(b, p) == pytest.approx(1.0, abs=1e-12)
    # three pairs of boundary points
    assert len(L.boundary_points(b, p)) == 6


def test_critical_lattice_at_p2_is_hexagonal():
    b = L.construct_critical_lattice(2.0, 0)
    assert b.det == pytest.approx(math.sqrt(3) / 2, abs=1e-14)
    with pytest.raises(DomainError):
        L.construct_critical_lattice(2.0, "two")
    with pytest.raises(DomainError):
        L.construct_critical_lattice(1.0)


def test_shrunk_critical_lattice_is_not_admissible():
    p = 3.0
    b = L.construct_critical_lattice(p)
    assert not L.is_admissible(b.scaled(0.999), L.RegionDp(p))


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 6.0])
def test_brute_force_matches_minimum_branch(p):
    ref = min(M.delta0(p), M.delta1(p))
    assert L.brute_force_critdet(p, 200) == pytest.approx(ref, abs=1e-9)


def test_hexagon_area_at_p2_is_constant():
    for t in (0.0, 0.3, 1.1):
        assert L.hexagon_area(2.0, t) == pytest.approx(math.sqrt(3) / 2, abs=1e-12)


def test_brute_force_validation():
    with pytest.raises(DomainError):
        L.brute_force_critdet(2.0, 10)
    with pytest.raises(DomainError):
        L.brute_force_critdet(1.0)


def test_constants():
    assert L.kappa_p(2.0, math.sqrt(3) / 2) == pytest.approx(2 / math.sqrt(3), rel=1e-15)
    assert L.minkowski_gamma_bound(2.0) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-15)
    assert L.minkowski_gamma_bound(1.0) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert L.hermite_gamma(2.0, 0.25) == 2.0
    for bad in (lambda: L.kappa_p(2.0, 0.0), lambda: L.minkowski_gamma_bound(0.5),
                lambda: L.hermite_gamma(2.0, -1.0)):
        with pytest.raises(DomainError):
            bad()
