"""Floating-point geometry-of-numbers oracle for D_p = {|x|^p + |y|^p < 1}.

Nothing here uses the moduli formulas: lattices are built from boundary
points directly, which makes the module an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from scipy.optimize import brentq, minimize_scalar

from .errors import ConvergenceError, DomainError

__all__ = [
    "LatticeBasis",
    "RegionDp",
    "construct_critical_lattice",
    "is_admissible",
    "lattice_minimum",
    "boundary_points",
    "brute_force_critdet",
    "hexagon_area",
    "kappa_p",
    "minkowski_gamma_bound",
    "hermite_gamma",
]

Vec = tuple[float, float]


@dataclass(frozen=True)
class LatticeBasis:
    v1: Vec
    v2: Vec

    def __post_init__(self) -> None:
        if not self.det > 0.0:
            raise DomainError(f"degenerate basis {self.v1}, {self.v2}")

    @property
    def det(self) -> float:
        return abs(self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0])

    def point(self, m: int, n: int) -> Vec:
        return (m * self.v1[0] + n * self.v2[0], m * self.v1[1] + n * self.v2[1])

    def scaled(self, c: float) -> "LatticeBasis":
        return LatticeBasis((c * self.v1[0], c * self.v1[1]), (c * self.v2[0], c * self.v2[1]))

    def reduced(self) -> "LatticeBasis":
        """Lagrange-Gauss reduction: |v1| <= |v2| and |<v1, v2>| <= |v1|^2 / 2."""
        a, b = self.v1, self.v2
        if _dot(a, a) > _dot(b, b):
            a, b = b, a
        for _ in range(200):
            mu = round(_dot(a, b) / _dot(a, a))
            b = (b[0] - mu * a[0], b[1] - mu * a[1])
            if _dot(b, b) >= _dot(a, a):
                return LatticeBasis(a, b)
            a, b = b, a
        raise ConvergenceError("basis reduction did not terminate")

    def points(self, bound: int) -> Iterator[tuple[int, int, Vec]]:
        """Nonzero points m v1 + n v2 with |m|, |n| <= bound, in a fixed order."""
        for m in range(-bound, bound + 1):
            for n in range(-bound, bound + 1):
                if m or n:
                    yield m, n, self.point(m, n)


def _dot(a: Vec, b: Vec) -> float:
    return a[0] * b[0] + a[1] * b[1]


@dataclass(frozen=True)
class RegionDp:
    p: float

    def __post_init__(self) -> None:
        if not self.p > 1.0:
            raise DomainError(f"D_p needs p > 1, got {self.p!r}")

    def gauge(self, v: Vec) -> float:
        """(|x|^p + |y|^p)^(1/p), the distance function of D_p."""
        return _gauge(v, self.p)

    def contains(self, v: Vec, tol: float = 0.0) -> bool:
        """Interior membership, with points within ``tol`` of the boundary counted as outside."""
        return _gauge(v, self.p) < 1.0 - tol


def _gauge(v: Vec, p: float) -> float:
    x, y = abs(v[0]), abs(v[1])
    m = max(x, y)
    if m == 0.0:
        return 0.0
    # scaled to avoid underflow of tiny coordinates raised to p
    return m * ((x / m) ** p + (y / m) ** p) ** (1.0 / p)


def _boundary(theta: float, p: float) -> Vec:
    c, s = math.cos(theta), math.sin(theta)
    r = 1.0 / _gauge((c, s), p)
    return (r * c, r * s)


def _enum_bound(basis: LatticeBasis, radius: float) -> int:
    # reduced basis: |m v1 + n v2|^2 >= (m^2 + n^2) |v1|^2 / 2
    lam = math.sqrt(_dot(basis.v1, basis.v1))
    return max(1, math.ceil(math.sqrt(2.0) * radius / lam))


def is_admissible(basis: LatticeBasis, region: RegionDp, tol: float = 1e-9) -> bool:
    """No nonzero lattice point strictly inside D_p (boundary points within ``tol`` allowed)."""
    red = basis.reduced()
    # interior points have sup-norm < 1, hence Euclidean norm < sqrt(2)
    bound = _enum_bound(red, math.sqrt(2.0))
    return not any(region.contains(v, tol) for _, _, v in red.points(bound))


def lattice_minimum(basis: LatticeBasis, p: float) -> float:
    """min of the D_p distance function over nonzero lattice points."""
    red = basis.reduced()
    best = _gauge(red.v1, p)
    # gauge >= sup-norm >= |v| / sqrt(2), so only |v| <= sqrt(2) best can compete
    bound = _enum_bound(red, math.sqrt(2.0) * best)
    for _, _, v in red.points(bound):
        g = _gauge(v, p)
        if g < best:
            best = g
    return best


def boundary_points(basis: LatticeBasis, p: float, tol: float = 1e-6) -> list[Vec]:
    """Lattice points on the boundary curve within ``tol`` in the distance function."""
    red = basis.reduced()
    bound = _enum_bound(red, math.sqrt(2.0) * (1.0 + tol))
    return [v for _, _, v in red.points(bound) if abs(_gauge(v, p) - 1.0) <= tol]


# --- critical lattices ---------------------------------------------------------------------------


def _anchor(p: float, kind: str) -> Vec:
    if kind == "zero":
        return (1.0, 0.0)
    c = math.pow(2.0, -1.0 / p)
    return (-c, c)


def _start(kind: str) -> Vec:
    # hexagonal lattice of the unit disk, the configuration at p = 2
    if kind == "zero":
        return (0.5, math.sqrt(3.0) / 2.0)
    t = math.radians(75.0)
    return (math.cos(t), math.sin(t))


def _newton(a: Vec, b: Vec, p: float, tol: float, max_iter: int = 100) -> Vec:
    """Damped Newton for b with |b|_p = 1 and |b - a|_p = 1."""

    def resid(v):
        return (_gauge(v, p) - 1.0, _gauge((v[0] - a[0], v[1] - a[1]), p) - 1.0)

    def grad(v):
        # gradient of the gauge: sign(x) |x|^(p-1) / g^(p-1)
        g = _gauge(v, p)
        return tuple(math.copysign(abs(x) ** (p - 1.0), x) / g ** (p - 1.0) for x in v)

    x = b
    r = resid(x)
    for _ in range(max_iter):
        if max(abs(r[0]), abs(r[1])) <= tol:
            return x
        g1 = grad(x)
        g2 = grad((x[0] - a[0], x[1] - a[1]))
        det = g1[0] * g2[1] - g1[1] * g2[0]
        if det == 0.0:
            break
        dx = -(r[0] * g2[1] - r[1] * g1[1]) / det
        dy = -(g1[0] * r[1] - g2[0] * r[0]) / det
        step = 1.0
        n0 = max(abs(r[0]), abs(r[1]))
        while step > 1e-6:
            y = (x[0] + step * dx, x[1] + step * dy)
            ry = resid(y)
            if max(abs(ry[0]), abs(ry[1])) < n0 or n0 <= tol:
                x, r = y, ry
                break
            step *= 0.5
        else:
            break
    if max(abs(r[0]), abs(r[1])) <= tol:
        return x
    raise ConvergenceError(f"critical lattice solve failed at p={p!r}")


def construct_critical_lattice(p: float, kind: str = "one", tol: float = 1e-13) -> LatticeBasis:
    """The lattice with three pairs of boundary points through the anchor of ``kind``.

    kind "zero" contains (1, 0); kind "one" contains (-2^(-1/p), 2^(-1/p)).
    The second generator b solves |b|_p = |b - a|_p = 1 by damped Newton,
    continued in p from the hexagonal lattice at p = 2.
    """
    if not p > 1.0:
        raise DomainError(f"p must exceed 1, got {p!r}")
    kind = str(kind).lower()
    if kind in ("0", "zero"):
        kind = "zero"
    elif kind in ("1", "one"):
        kind = "one"
    else:
        raise DomainError(f"unknown lattice kind {kind!r}")
    steps = max(1, math.ceil(abs(p - 2.0) / 0.05))
    b = _start(kind)
    for k in range(1, steps + 1):
        q = 2.0 + (p - 2.0) * k / steps
        b = _newton(_anchor(q, kind), b, q, tol if k == steps else 1e-10)
    return LatticeBasis(_anchor(p, kind), b)


# --- brute force over inscribed hexagons -----------------------------------------------------


def hexagon_area(p: float, theta: float) -> float:
    """Area |a x b| with a on the boundary at angle theta and b, b - a on the boundary too.

    Along the arc phi in (theta, theta + pi) the point b(phi) - a moves from 0 to -2a,
    so its gauge crosses 1; the crossing is unique for the strictly convex D_p.
    """
    a = _boundary(theta, p)

    def f(phi):
        b = _boundary(phi, p)
        return _gauge((b[0] - a[0], b[1] - a[1]), p) - 1.0

    phi = brentq(f, theta + 1e-9, theta + math.pi - 1e-9, xtol=1e-15, maxiter=200)
    b = _boundary(phi, p)
    return abs(a[0] * b[1] - a[1] * b[0])


def brute_force_critdet(p: float, resolution: int = 1000) -> float:
    """min over a quarter-boundary grid of hexagon areas, refined by golden-section search."""
    if not p > 1.0:
        raise DomainError(f"p must exceed 1, got {p!r}")
    if resolution < 100:
        raise DomainError("resolution must be at least 100")
    h = (math.pi / 2.0) / resolution
    grid = [k * h for k in range(resolution + 1)]
    areas = [hexagon_area(p, t) for t in grid]
    # ties go to the smaller parameter
    k = min(range(len(areas)), key=lambda i: (areas[i], i))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, resolution)]
    best = areas[k]
    if hi > lo:
        res = minimize_scalar(lambda t: hexagon_area(p, t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        if res.success and res.fun < best:
            best = float(res.fun)
    return best


# --- constants -----------------------------------------------------------------------------------


def kappa_p(p: float, critdet: float) -> float:
    """Optimal constant of the Diophantine inequality: critdet^(-p/2)."""
    if not critdet > 0.0:
        raise DomainError("critdet must be positive")
    return math.pow(critdet, -p / 2.0)


def minkowski_gamma_bound(p: float) -> float:
    """Gamma(1 + 2/p)^(1/2) / Gamma(1 + 1/p); p = 1 is accepted as a limiting comparison."""
    if not p >= 1.0:
        raise DomainError(f"p must be at least 1, got {p!r}")
    return math.sqrt(math.gamma(1.0 + 2.0 / p)) / math.gamma(1.0 + 1.0 / p)


def hermite_gamma(p: float, critdet: float) -> float:
    """m / d^(1/2) on a critical lattice, where m = 1: critdet^(-1/2)."""
    if not critdet > 0.0:
        raise DomainError("critdet must be positive")
    return math.pow(critdet, -0.5)
