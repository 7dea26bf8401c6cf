"""Adaptive box subdivision proving sign conditions over strips of the moduli domain.

A strip is the set lower(p) <= x <= upper(p) over a p-range, x being sigma or
tau.  Boxes live in normalized chart coordinates (p, u), u in [0, 1], so the
leaves of a certificate tile [p_lo, p_hi] x [0, 1] exactly.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

from . import __version__
from . import moduli as M
from .errors import CritdetError, DomainError
from .interval import Box, Interval
from .kernel import IntervalJet

log = logging.getLogger(__name__)

CERT_VERSION = 1
P0_WINDOW = (2.3, 2.9)
EXCLUSION_RADIUS = 1e-2
# Below this sigma_p - 1 the sigma strip is too thin and tau serves as coordinate.
TAU_CHART_BELOW = 1.25


class Condition(str, Enum):
    HNEG = "h-neg"
    GNEG = "g-neg"
    LPOS = "l-pos"
    L1POS = "l1-pos"
    L0POS = "l0-pos"
    ANALYTIC = "analytic"

    @property
    def quantity(self) -> str:
        return _QUANTITY[self]

    @property
    def sign(self) -> int:
        """Required strict sign of the quantity."""
        return -1 if self in (Condition.HNEG, Condition.GNEG) else 1

    @classmethod
    def parse(cls, name: str) -> "Condition":
        key = name.strip().lower().replace("_", "-")
        for c in cls:
            if c.value == key or c.name.lower() == key.replace("-", ""):
                return c
        raise DomainError(f"unknown condition {name!r}")


_QUANTITY = {
    Condition.HNEG: "h",
    Condition.GNEG: "g",
    Condition.LPOS: "l",
    Condition.L1POS: "l1",
    Condition.L0POS: "l0",
    Condition.ANALYTIC: "l",
}


class Verdict(str, Enum):
    PROVEN = "proven"
    DISPROVEN = "disproven"
    UNKNOWN = "unknown"


class Status(str, Enum):
    PROVEN = "PROVEN"
    FAILED = "FAILED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class VerifierConfig:
    e1: float = 1e-12
    max_iter: int = 200
    depth_cap: int = 40
    margin: float = 1e-4
    workers: int = 1
    max_boxes: int = 2_000_000
    taylor: int = 3

    def __post_init__(self) -> None:
        if not (self.e1 > 0 and self.max_iter > 0 and self.depth_cap > 0 and self.margin > 0
                and self.workers > 0 and self.max_boxes > 0 and self.taylor > 0):
            raise DomainError("verifier configuration values must be positive")

    @property
    def moduli(self) -> M.ModuliConfig:
        return M.ModuliConfig(e1=self.e1, max_iter=self.max_iter)

    def snapshot(self) -> dict:
        # worker count is deliberately absent: certificates must not depend on it
        return {"e1": self.e1, "max_iter": self.max_iter, "depth_cap": self.depth_cap,
                "margin": self.margin}


DEFAULT = VerifierConfig()


@dataclass(frozen=True)
class StripSpec:
    """lower(p) + margin_lower <= x <= upper(p) - margin_upper for p in p_range."""

    p_range: Interval
    lower: M.Curve
    upper: M.Curve
    chart: str = "sigma"
    margin_lower: float = 0.0
    margin_upper: float = 0.0
    scale: str = "linear"

    def __post_init__(self) -> None:
        if not self.p_range.lo > 1.0:
            raise DomainError(f"strip needs p > 1, got {self.p_range}")
        if self.p_range.is_thin():
            raise DomainError("strip needs a p-range of positive width")
        if self.chart not in ("sigma", "tau"):
            raise DomainError(f"unknown chart {self.chart!r}")

    def make_chart(self) -> M.Chart:
        lo, hi = self.lower, self.upper
        if self.margin_lower:
            lo = M.Offset(lo, self.margin_lower)
        if self.margin_upper:
            hi = M.Offset(hi, -self.margin_upper)
        return M.Chart(self.chart, lo, hi, self.scale)

    def excluded(self) -> list[dict]:
        out = []
        if self.margin_lower:
            out.append({"edge": "lower", "coordinate": self.chart, "curve": self.lower.to_dict(),
                        "width": self.margin_lower})
        if self.margin_upper:
            out.append({"edge": "upper", "coordinate": self.chart, "curve": self.upper.to_dict(),
                        "width": self.margin_upper})
        return out

    def to_dict(self) -> dict:
        return {"p_range": [self.p_range.lo, self.p_range.hi], "chart": self.chart,
                "lower": self.lower.to_dict(), "upper": self.upper.to_dict(),
                "margin_lower": self.margin_lower, "margin_upper": self.margin_upper,
                "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "StripSpec":
        return cls(Interval(*d["p_range"]), M.curve_from_dict(d["lower"]),
                   M.curve_from_dict(d["upper"]), d["chart"], d["margin_lower"], d["margin_upper"],
                   d.get("scale", "linear"))


@dataclass
class Certificate:
    condition: str
    region: dict
    status: Status
    boxes_checked: int
    max_depth: int
    excluded_margins: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    leaves: list = field(default_factory=list)
    parts: list = field(default_factory=list)
    narrative: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    version: int = CERT_VERSION
    tool_version: str = __version__

    @property
    def proven(self) -> bool:
        return self.status is Status.PROVEN

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "tool_version": self.tool_version,
            "condition": self.condition,
            "region": self.region,
            "status": self.status.value,
            "boxes_checked": self.boxes_checked,
            "max_depth": self.max_depth,
            "excluded_margins": self.excluded_margins,
            "failures": sorted(self.failures, key=lambda f: f["box"]),
            "config": self.config,
            "leaves": sorted(self.leaves),
            "parts": [p.to_dict() for p in self.parts],
            "narrative": list(self.narrative),
            "extra": self.extra,
        }

    def to_json(self, indent: Optional[int] = None) -> str:
        # json writes floats with repr, the shortest round-trip decimal
        return json.dumps(self.to_dict(), indent=indent, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        return cls(
            condition=d["condition"], region=d["region"], status=Status(d["status"]),
            boxes_checked=d["boxes_checked"], max_depth=d["max_depth"],
            excluded_margins=d["excluded_margins"], failures=d["failures"], config=d["config"],
            leaves=[list(x) for x in d["leaves"]], parts=[cls.from_dict(p) for p in d["parts"]],
            narrative=d["narrative"], extra=d["extra"], version=d["version"],
            tool_version=d["tool_version"],
        )

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        return cls.from_dict(json.loads(text))

    def summary(self) -> str:
        p = self.region.get("p_range")
        pr = f"[{p[0]!r}, {p[1]!r}]" if p else "?"
        return f"{self.condition} {pr}: {self.status.value} boxes={self.boxes_checked} depth={self.max_depth}"


# --- single boxes -------------------------------------------------------------------------


def _classify(enc: Interval, sign: int) -> Verdict:
    if sign < 0:
        if enc.hi < 0.0:
            return Verdict.PROVEN
        if enc.lo > 0.0:
            return Verdict.DISPROVEN
    else:
        if enc.lo > 0.0:
            return Verdict.PROVEN
        if enc.hi < 0.0:
            return Verdict.DISPROVEN
    return Verdict.UNKNOWN


def check_cell(P: Interval, U: Interval, chart: M.Chart, condition: Condition,
               cfg: VerifierConfig = DEFAULT) -> tuple[Verdict, Optional[Interval], str]:
    """Verdict for one box in chart coordinates, with the enclosure and any failure cause."""
    try:
        enc = M.enclose(condition.quantity, P, U, chart, cfg.moduli, taylor=cfg.taylor)
    except (CritdetError, ArithmeticError, ValueError) as exc:
        cause = f"{type(exc).__name__}: {exc}"
        log.debug("box p=%s u=%s: %s", P, U, cause)
        return Verdict.UNKNOWN, None, cause
    return _classify(enc, condition.sign), enc, ""


def verify_box(box: Box, condition: Condition, cfg: VerifierConfig = DEFAULT) -> Verdict:
    """Sign of the condition's function over a (p, sigma) box; sigma is clamped to sigma_p."""
    if isinstance(condition, str):
        condition = Condition.parse(condition)
    return check_cell(box.p, box.sigma, M.SIGMA_CHART, condition, cfg)[0]


# --- strips ----------------------------------------------------------------------------------

_CTX: dict = {}


def _init_worker(chart_dict: dict, condition: str, cfg: VerifierConfig) -> None:
    _CTX["chart"] = _chart_from_dict(chart_dict)
    _CTX["condition"] = Condition(condition)
    _CTX["cfg"] = cfg


def _run_batch(batch: Sequence[tuple[float, float, float, float]]) -> list:
    chart, cond, cfg = _CTX["chart"], _CTX["condition"], _CTX["cfg"]
    out = []
    for plo, phi, ulo, uhi in batch:
        v, _, cause = check_cell(Interval(plo, phi), Interval(ulo, uhi), chart, cond, cfg)
        out.append((v.value, cause))
    return out


def _chart_from_dict(d: dict) -> M.Chart:
    if "lower" not in d:
        return M.Chart(d["kind"])
    return M.Chart(d["kind"], M.curve_from_dict(d["lower"]), M.curve_from_dict(d["upper"]),
                   d.get("scale", "linear"))


def _split(cell, width_p: float):
    plo, phi, ulo, uhi = cell
    # wider normalized side; ties go to p
    if (phi - plo) / width_p >= (uhi - ulo):
        m = 0.5 * plo + 0.5 * phi
        return (plo, m, ulo, uhi), (m, phi, ulo, uhi)
    m = 0.5 * ulo + 0.5 * uhi
    return (plo, phi, ulo, m), (plo, phi, m, uhi)


def _batches(cells: list, n: int) -> list:
    size = max(1, min(256, math.ceil(len(cells) / (4 * n))))
    return [cells[i:i + size] for i in range(0, len(cells), size)]


def verify_strip(strip: StripSpec, condition: Condition, cfg: VerifierConfig = DEFAULT) -> Certificate:
    """Prove the condition on the strip by bisection, lowest depth first."""
    if isinstance(condition, str):
        condition = Condition.parse(condition)
    chart = strip.make_chart()
    chart_dict = chart.to_dict()
    P0 = strip.p_range
    width_p = P0.width
    level = [(P0.lo, P0.hi, 0.0, 1.0)]
    leaves: list = []
    failures: list = []
    checked = 0
    depth = 0
    max_depth = 0
    truncated = False
    pool = None
    if cfg.workers > 1:
        pool = ProcessPoolExecutor(cfg.workers, initializer=_init_worker,
                                   initargs=(chart_dict, condition.value, cfg))
    else:
        _init_worker(chart_dict, condition.value, cfg)
    try:
        while level:
            if pool is None:
                results = _run_batch(level)
            else:
                results = [r for part in pool.map(_run_batch, _batches(level, cfg.workers))
                           for r in part]
            checked += len(level)
            nxt = []
            for cell, (verdict, cause) in zip(level, results):
                if verdict == Verdict.PROVEN.value:
                    leaves.append(list(cell))
                    max_depth = max(max_depth, depth)
                elif verdict == Verdict.DISPROVEN.value:
                    failures.append({"box": list(cell), "depth": depth, "reason": "disproven"})
                    max_depth = max(max_depth, depth)
                elif depth >= cfg.depth_cap:
                    failures.append({"box": list(cell), "depth": depth,
                                     "reason": "depth cap" + (f"; {cause}" if cause else "")})
                    max_depth = max(max_depth, depth)
                else:
                    nxt.extend(_split(cell, width_p))
            if checked + len(nxt) > cfg.max_boxes and nxt:
                for cell in nxt:
                    failures.append({"box": list(cell), "depth": depth + 1, "reason": "box budget"})
                truncated = True
                nxt = []
            level = nxt
            depth += 1
    finally:
        if pool is not None:
            pool.shutdown()
    if any(f["reason"] == "disproven" for f in failures):
        status = Status.FAILED
    elif failures or truncated:
        status = Status.INCONCLUSIVE
    else:
        status = Status.PROVEN
    return Certificate(
        condition=condition.value,
        region=strip.to_dict(),
        status=status,
        boxes_checked=checked,
        max_depth=max_depth,
        excluded_margins=strip.excluded(),
        failures=failures,
        config=cfg.snapshot(),
        leaves=leaves,
    )


def leaf_area(cert: Certificate) -> float:
    """Total normalized area of the proven leaves (p-width times u-width)."""
    return math.fsum((b[1] - b[0]) * (b[3] - b[2]) for b in cert.leaves)


def recheck(cert: Certificate, cfg: Optional[VerifierConfig] = None) -> bool:
    """Re-verify every leaf of a single-strip certificate independently."""
    if cert.parts:
        return all(recheck(p, cfg) for p in cert.parts)
    if cfg is None:
        c = cert.config
        cfg = VerifierConfig(e1=c["e1"], max_iter=c["max_iter"], depth_cap=c["depth_cap"],
                             margin=c["margin"])
    strip = StripSpec.from_dict(cert.region)
    chart = strip.make_chart()
    cond = Condition(cert.condition)
    for plo, phi, ulo, uhi in cert.leaves:
        v, _, _ = check_cell(Interval(plo, phi), Interval(ulo, uhi), chart, cond, cfg)
        if v is not Verdict.PROVEN:
            return False
    return cert.proven


def _composite(name: str, region: dict, parts: list, narrative: list, cfg: VerifierConfig,
               excluded: list, extra: dict, ok: bool = True) -> Certificate:
    if ok and all(p.proven for p in parts):
        status = Status.PROVEN
    elif any(p.status is Status.FAILED for p in parts):
        status = Status.FAILED
    else:
        status = Status.INCONCLUSIVE
    return Certificate(
        condition=name,
        region=region,
        status=status,
        boxes_checked=sum(p.boxes_checked for p in parts),
        max_depth=max((p.max_depth for p in parts), default=0),
        excluded_margins=excluded,
        failures=[],
        config=cfg.snapshot(),
        parts=parts,
        narrative=narrative,
        extra=extra,
    )


# --- the branch of the minimum ------------------------------------------------------------------


def phi(P, cfg: VerifierConfig = DEFAULT):
    """delta0 - delta1; negative where the sigma_p endpoint gives the minimum."""
    return M.delta0(P) - M.delta1(P, cfg.moduli)


def _sign_on(P: Interval, cfg: VerifierConfig, sign: int, depth: int = 0) -> tuple[bool, int]:
    """Whether phi has strict sign ``sign`` on P, by bisection; also the piece count."""
    v = phi(P, cfg)
    if (v.lo > 0.0) if sign > 0 else (v.hi < 0.0):
        return True, 1
    if depth >= 30 or ((v.hi < 0.0) if sign > 0 else (v.lo > 0.0)):
        return False, 1
    m = P.mid
    a, na = _sign_on(Interval(P.lo, m), cfg, sign, depth + 1)
    if not a:
        return False, na
    b, nb = _sign_on(Interval(m, P.hi), cfg, sign, depth + 1)
    return b, na + nb


# --- p0 --------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class P0Enclosure:
    enclosure: Interval
    iterations: int
    status: Status

    def to_dict(self) -> dict:
        return {"enclosure": [self.enclosure.lo, self.enclosure.hi], "iterations": self.iterations,
                "status": self.status.value, "width": self.enclosure.width}


def _phi_sign(p: float, cfg: VerifierConfig) -> int:
    v = phi(Interval(p), cfg)
    if v.lo > 0.0:
        return 1
    if v.hi < 0.0:
        return -1
    return 0


def isolate_p0(tol: float, cfg: VerifierConfig = DEFAULT) -> P0Enclosure:
    """Bisection on delta0 - delta1 over a window that excludes the root at p = 2."""
    if not tol > 0.0 or math.isnan(tol):
        raise DomainError(f"tol must be positive, got {tol!r}")
    return _isolate_p0(float(tol), cfg.e1, cfg.max_iter)


@lru_cache(maxsize=64)
def _isolate_p0(tol: float, e1: float, max_iter: int) -> P0Enclosure:
    cfg = VerifierConfig(e1=e1, max_iter=max_iter)
    lo, hi = P0_WINDOW
    if _phi_sign(lo, cfg) >= 0 or _phi_sign(hi, cfg) <= 0:
        return P0Enclosure(Interval(lo, hi), 0, Status.INCONCLUSIVE)
    it = 0
    while hi - lo > tol:
        w = hi - lo
        m = 0.5 * lo + 0.5 * hi
        s = _phi_sign(m, cfg)
        if s == 0:
            # thin-point sign unresolved: try nearby cut points
            for k in (1, -1, 2, -2, 3, -3):
                c = m + k * w / 64.0
                s = _phi_sign(c, cfg)
                if s:
                    m = c
                    break
        if s == 0 or not lo < m < hi:
            return P0Enclosure(Interval(lo, hi), it, Status.INCONCLUSIVE)
        if s > 0:
            hi = m
        else:
            lo = m
        it += 1
    return P0Enclosure(Interval(lo, hi), it, Status.PROVEN)


# --- composite arguments -------------------------------------------------------------------------


FIFTH = M.OnePlus(1, 5, 1.0)           # 1 + 1/(5p)
ROOT = M.OnePlus(137, 100, 0.5)        # 1 + 1.37/sqrt(p)


def compose_p_ge_6(p_range: Interval, cfg: VerifierConfig = DEFAULT) -> Certificate:
    """The three-strip argument for Delta(p, sigma) > Delta(p, 1) on p_range (p >= 6)."""
    P = Interval.coerce(p_range)
    if P.lo < 6.0:
        raise DomainError(f"compose_p_ge_6 needs p >= 6, got {P}")
    strips = [
        (StripSpec(P, M.Const(1.0), FIFTH), Condition.HNEG),
        (StripSpec(P, FIFTH, ROOT), Condition.GNEG),
        (StripSpec(P, ROOT, M.SigmaP()), Condition.L1POS),
    ]
    parts = [verify_strip(s, c, cfg) for s, c in strips]
    narrative = [
        "g(p, 1) = 0 and h = dg/dsigma < 0 on 1 <= sigma <= 1 + 1/(5p) give g < 0 on (1, 1 + 1/(5p)]",
        "g < 0 on 1 + 1/(5p) <= sigma <= 1 + 1.37/sqrt(p), so g < 0 on (1, 1 + 1.37/sqrt(p)]",
        "sign dDelta/dsigma = -sign g, so Delta is increasing there and exceeds Delta(p, 1)",
        "l1 = Delta - Delta(p, 1) > 0 on 1 + 1.37/sqrt(p) <= sigma <= sigma_p",
        "hence Delta(p, sigma) > Delta(p, 1) for 1 < sigma <= sigma_p",
    ]
    region = {"p_range": [P.lo, P.hi], "chart": "sigma", "lower": {"kind": "const", "c": 1.0},
              "upper": {"kind": "sigma_p"}}
    return _composite("compose-p-ge-6", region, parts, narrative, cfg, [], {})


def _h_band(P: Interval, cfg: VerifierConfig) -> Optional[float]:
    """Float prescan: a sigma-width beta with h < 0 on [1, 1 + beta] over P, or None."""
    mc = cfg.moduli
    extents = []
    for k in range(5):
        p = P.lo + (P.hi - P.lo) * k / 4.0
        top = M.sigma_p(p) - 1.0
        try:
            if not M.h(p, 1.0, mc) < 0.0:
                return None
            hit = top
            for j in range(1, 201):
                s = 1.0 + top * j / 200.0
                if not M.h(p, min(s, M.sigma_p(p)), mc) < 0.0:
                    hit = top * (j - 1) / 200.0
                    break
        except CritdetError:
            return None
        extents.append(min(hit, top))
    beta = 0.6 * min(extents)
    cap = 0.5 * (M.sigma_p(P.lo) - 1.0)
    beta = min(beta, cap)
    return beta if beta > 0.0 else None


def _tau_band(P: Interval, beta_sigma: float, cfg: VerifierConfig) -> Optional[float]:
    """The sigma-band of width beta near sigma = 1, expressed as a tau-width below tau_p."""
    mc = cfg.moduli
    widths = []
    for k in range(5):
        p = P.lo + (P.hi - P.lo) * k / 4.0
        widths.append(M.tau_p_point(p, mc) - M.tau_point(p, 1.0 + beta_sigma, mc))
    w = min(widths)
    return w if w > 0.0 else None


def _cut_residual(Q: Interval, margin: float, t: float, cfg: VerifierConfig) -> Interval:
    """Enclosure of F(p, sigma_p(p) - margin, t) over Q by a second-order Taylor form."""
    J = IntervalJet
    T = Interval(t)

    def jet(X: Interval, order: int):
        pj = J.variable(X, 0, order)
        sj = M.SigmaP().jet(pj) - margin
        return M._F_jet(pj, sj, J.constant(T, order))

    c = Interval(Q.mid)
    return M.taylor_form(jet(c, 1), jet(Q, 2), (Q - c.lo, Interval(0.0)))


def _tau_cut(P: Interval, margin: float, cfg: VerifierConfig) -> tuple[float, int]:
    """tau* with tau(p, sigma) >= tau* whenever sigma <= sigma_p(p) - margin, p in P.

    F increases in sigma and tau, so F(p, sigma_p(p) - margin, tau*) < 0 on P
    puts sigma(p, tau*) above sigma_p(p) - margin; tau decreasing in sigma
    then gives the claim.  Returns tau* and the number of p-pieces checked.
    """
    mc = cfg.moduli
    est = min(M.tau_point(p, M.sigma_p(p) - margin, mc) for p in (P.lo, P.mid, P.hi))
    t = 0.5 * est
    pieces = [P]
    checked = 0
    while pieces:
        Q = pieces.pop()
        checked += 1
        try:
            ok = _cut_residual(Q, margin, t, cfg).hi < 0.0
        except CritdetError:
            ok = False
        if ok:
            continue
        if Q.width < 1e-9 or checked > 100_000:
            raise DomainError(f"cannot certify the tau cut on {Q}")
        m = Q.mid
        pieces.extend([Interval(m, Q.hi), Interval(Q.lo, m)])
    return t, checked


def verify_theorem_window(p_range: Interval, cfg: VerifierConfig = DEFAULT) -> Certificate:
    """Delta(p, sigma) > min(Delta0, Delta1) on 1 + margin <= sigma <= sigma_p - margin."""
    P = Interval.coerce(p_range)
    if not P.lo > 1.0:
        raise DomainError(f"window needs p > 1, got {P}")
    r = EXCLUSION_RADIUS
    p0 = isolate_p0(1e-3, cfg)
    if p0.status is not Status.PROVEN:
        raise CritdetError("p0 enclosure unavailable")
    E = p0.enclosure
    if P.lo <= 2.0 + r and P.hi >= 2.0 - r:
        raise DomainError(f"window {P} meets the excluded neighborhood of p = 2")
    if P.lo <= E.hi + r and P.hi >= E.lo - r:
        raise DomainError(f"window {P} meets the excluded neighborhood of p0 {E}")
    branch = "delta0" if 2.0 < P.lo and P.hi < E.lo else "delta1"
    mc_margin = cfg.margin
    # min(Delta0, Delta1) is the asserted branch on all of P
    branch_ok, branch_pieces = _sign_on(P, cfg, 1 if branch == "delta1" else -1)
    parts: list[Certificate] = []
    narrative: list[str] = []
    excluded: list[dict] = []
    extra: dict = {"branch": branch, "branch_verified": branch_ok, "branch_pieces": branch_pieces,
                   "p0_enclosure": [E.lo, E.hi]}
    if branch == "delta1":
        narrative.append("delta0 - delta1 > 0 on the window, so the minimum is Delta1 = Delta(p, 1)")
        beta = _h_band(P, cfg)
        thin = M.sigma_p(P.lo) - 1.0 < TAU_CHART_BELOW - 1.0
        if beta is None:
            low = StripSpec(P, M.Const(1.0), M.SigmaP(), "sigma", mc_margin, mc_margin)
            parts.append(verify_strip(low, Condition.L1POS, cfg))
            excluded = low.excluded()
            narrative.append("l1 > 0 on the margin-shrunk strip")
        elif not thin:
            cut = 1.0 + beta
            band = StripSpec(P, M.Const(1.0), M.Const(cut))
            rest = StripSpec(P, M.Const(cut), M.SigmaP(), "sigma", 0.0, mc_margin)
            parts.append(verify_strip(band, Condition.HNEG, cfg))
            parts.append(verify_strip(rest, Condition.L1POS, cfg))
            excluded = rest.excluded()
            extra["band_sigma"] = cut
            narrative += [
                f"h < 0 on 1 <= sigma <= {cut!r} and g(p, 1) = 0 give g < 0, hence Delta increasing, "
                "on that band: Delta > Delta1 for sigma > 1",
                f"l1 > 0 on {cut!r} <= sigma <= sigma_p - {mc_margin!r}",
            ]
        else:
            tb = _tau_band(P, beta, cfg)
            if tb is None:
                raise CritdetError("tau band prescan failed")
            band = StripSpec(P, M.Offset(M.TauP(cfg.moduli), -tb), M.TauP(cfg.moduli), "tau")
            rest = StripSpec(P, M.Const(0.0), M.Offset(M.TauP(cfg.moduli), -tb), "tau")
            parts.append(verify_strip(band, Condition.HNEG, cfg))
            parts.append(verify_strip(rest, Condition.L1POS, cfg))
            extra["band_tau"] = tb
            narrative += [
                f"h < 0 on tau_p - {tb!r} <= tau <= tau_p (sigma near 1) and g(p, 1) = 0 give "
                "Delta > Delta1 there",
                f"l1 > 0 on 0 <= tau <= tau_p - {tb!r}",
            ]
    else:
        narrative.append("delta0 - delta1 < 0 on the window, so the minimum is Delta0 = Delta(p, sigma_p)")
        t_star, pieces = _tau_cut(P, mc_margin, cfg)
        strip = StripSpec(P, M.Const(t_star), M.TauP(cfg.moduli), "tau", scale="log")
        parts.append(verify_strip(strip, Condition.L0POS, cfg))
        excluded = [{"edge": "upper", "coordinate": "sigma", "curve": {"kind": "sigma_p"},
                     "width": mc_margin}]
        extra["tau_cut"] = t_star
        extra["tau_cut_pieces"] = pieces
        narrative += [
            f"sigma(p, {t_star!r}) >= sigma_p - {mc_margin!r} on the window, so the strip "
            f"{t_star!r} <= tau <= tau_p covers 1 <= sigma <= sigma_p - {mc_margin!r}",
            "l0 > 0 on that strip",
        ]
    narrative.append("hence Delta(p, sigma) > min(Delta0, Delta1) on the window's interior strip")
    region = StripSpec(P, M.Const(1.0), M.SigmaP(), "sigma", mc_margin, mc_margin).to_dict()
    return _composite("analytic", region, parts, narrative, cfg, excluded, extra, ok=branch_ok)


# --- MAS probe (not rigorous) --------------------------------------------------------------------


@dataclass(frozen=True)
class MasReport:
    p_range: tuple
    grid: int
    p1: Optional[float]
    p2: Optional[float]
    samples: list
    label: str = "NOT-VERIFIED"
    notes: tuple = ()

    def to_dict(self) -> dict:
        return {"label": self.label, "p_range": list(self.p_range), "grid": self.grid,
                "p1": self.p1, "p2": self.p2, "notes": list(self.notes), "samples": self.samples}


def d_sigma2_endpoint(p: float, at: str, cfg: VerifierConfig = DEFAULT) -> float:
    """Float second sigma-derivative of Delta at sigma = 1 (``at="one"``) or sigma_p."""
    if at == "one":
        fam = M.Family(p, 1.0, M.SIGMA_CHART, 2, False, cfg.moduli)
    elif at == "sigma_p":
        fam = M.Family(p, 0.0, M.TAU_CHART, 2, False, cfg.moduli)
    else:
        raise DomainError(f"unknown endpoint {at!r}")
    return fam.get("d_sigma2").value


def _secant(f, a: float, b: float, fa: float, fb: float, iters: int = 60) -> float:
    # Illinois-style safeguarded secant on a sign-change bracket
    side = 0
    for _ in range(iters):
        c = b - fb * (b - a) / (fb - fa)
        if not a < c < b and not b < c < a:
            c = 0.5 * (a + b)
        fc = f(c)
        if fc == 0.0 or abs(b - a) < 1e-13:
            return c
        if (fc > 0) == (fb > 0):
            b, fb = c, fc
            if side == -1:
                fa *= 0.5
            side = -1
        else:
            a, fa = c, fc
            if side == 1:
                fb *= 0.5
            side = 1
    return 0.5 * (a + b)


def probe_mas(p_range: Interval = Interval(2.01, 10.0), grid: int = 200,
              cfg: VerifierConfig = DEFAULT) -> MasReport:
    """Floating-point roots p1 (second sigma-derivative at sigma_p) and p2 (at sigma = 1) above 2."""
    P = Interval.coerce(p_range)
    if grid < 2:
        raise DomainError("grid needs at least two points")
    ps = [P.lo + (P.hi - P.lo) * k / (grid - 1) for k in range(grid)]
    samples = []
    roots = {}
    notes = []
    for at, key in (("sigma_p", "p1"), ("one", "p2")):
        f = lambda p, at=at: d_sigma2_endpoint(p, at, cfg)  # noqa: E731
        vals = [f(p) for p in ps]
        samples.append({"endpoint": at, "values": vals})
        root = None
        for k in range(grid - 1):
            if ps[k] > 2.0 and vals[k] != 0.0 and (vals[k] > 0) != (vals[k + 1] > 0):
                root = _secant(f, ps[k], ps[k + 1], vals[k], vals[k + 1])
                break
        if root is None:
            notes.append(f"no sign change of the second sigma-derivative at {at} in range")
        roots[key] = root
    return MasReport((P.lo, P.hi), grid, roots["p1"], roots["p2"],
                     [{"p": ps}] + samples, notes=tuple(notes))


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)
