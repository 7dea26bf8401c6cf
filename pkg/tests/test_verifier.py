import json
import random

import pytest

from critdet import Box, DomainError, Interval
from critdet import moduli as M
from critdet import verifier as V
from critdet.verifier import Condition, Status, StripSpec, Verdict, VerifierConfig

P6 = Interval(6.0, 6.1)


@pytest.fixture(scope="module")
def hneg_cert():
    return V.verify_strip(StripSpec(P6, M.Const(1.0), V.FIFTH), Condition.HNEG)


def test_condition_parsing():
    assert Condition.parse("H_NEG") is Condition.HNEG
    assert Condition.parse("l1pos") is Condition.L1POS
    assert Condition.GNEG.sign == -1 and Condition.L0POS.sign == 1
    assert Condition.LPOS.quantity == "l"
    with pytest.raises(DomainError):
        Condition.parse("x-pos")


def test_config_validation():
    with pytest.raises(DomainError):
        VerifierConfig(depth_cap=0)
    assert "workers" not in VerifierConfig(workers=3).snapshot()


def test_verify_box_verdicts():
    assert V.verify_box(Box.from_bounds(6.0, 6.05, 1.001, 1.01), "h-neg") is Verdict.PROVEN
    assert V.verify_box(Box.from_bounds(6.0, 6.05, 1.3, 1.31), Condition.GNEG) is Verdict.PROVEN
    # Delta0 < Delta1 for 2 < p < p0, so l1 < 0 next to sigma_p
    s = M.sigma_p(2.3)
    assert V.verify_box(Box.from_bounds(2.3, 2.3, s - 1e-3, s - 5e-4), "l1-pos") is Verdict.DISPROVEN
    # l vanishes at sigma = 1
    assert V.verify_box(Box.point(3.0, 1.0), "l-pos") is Verdict.UNKNOWN


def test_strip_spec_round_trip_and_margins():
    s = StripSpec(P6, M.Const(1.0), M.SigmaP(), "sigma", 1e-4, 2e-4)
    assert StripSpec.from_dict(json.loads(json.dumps(s.to_dict()))).to_dict() == s.to_dict()
    edges = {e["edge"]: e["width"] for e in s.excluded()}
    assert edges == {"lower": 1e-4, "upper": 2e-4}
    ch = s.make_chart()
    assert ch.value(6.0, 0.0) == 1.0 + 1e-4
    with pytest.raises(DomainError):
        StripSpec(Interval(6.0), M.Const(1.0), M.SigmaP())
    with pytest.raises(DomainError):
        StripSpec(P6, M.Const(1.0), M.SigmaP(), "rho")


def test_strip_proof_covers_the_strip(hneg_cert):
    c = hneg_cert
    assert c.status is Status.PROVEN and not c.failures
    # dyadic leaves tile the normalized strip exactly
    assert V.leaf_area(c) == pytest.approx(P6.width, rel=1e-15)
    assert c.boxes_checked >= len(c.leaves)


def test_proven_leaves_are_sound_at_sample_points(hneg_cert):
    chart = StripSpec.from_dict(hneg_cert.region).make_chart()
    rng = random.Random(7)
    for plo, phi, ulo, uhi in hneg_cert.leaves:
        for _ in range(5):
            p = rng.uniform(plo, phi)
            s = chart.value(p, rng.uniform(ulo, uhi))
            assert M.h(p, s) < 0.0


def test_recheck_and_json_round_trip(hneg_cert):
    assert V.recheck(hneg_cert)
    text = hneg_cert.to_json()
    again = V.Certificate.from_json(text)
    assert again.to_json() == text
    assert again.proven


def test_recheck_rejects_tampered_leaves(hneg_cert):
    bad = V.Certificate.from_dict(hneg_cert.to_dict())
    bad.region = StripSpec(P6, M.Const(1.2), M.Const(1.3)).to_dict()
    assert not V.recheck(bad)


def test_failed_and_inconclusive_statuses():
    s = M.sigma_p(2.3)
    strip = StripSpec(Interval(2.3, 2.31), M.Const(s - 0.01), M.SigmaP())
    failed = V.verify_strip(strip, Condition.L1POS, VerifierConfig(depth_cap=8))
    assert failed.status is Status.FAILED
    assert any(f["reason"] == "disproven" for f in failed.failures)
    capped = V.verify_strip(StripSpec(Interval(3.0, 3.1), M.Const(1.0), M.SigmaP()),
                            Condition.LPOS, VerifierConfig(depth_cap=2))
    assert capped.status is Status.INCONCLUSIVE
    assert any(f["reason"].startswith("depth cap") for f in capped.failures)
    budget = V.verify_strip(StripSpec(Interval(3.0, 3.1), M.Const(1.0), M.SigmaP()),
                            Condition.LPOS, VerifierConfig(max_boxes=10))
    assert budget.status is Status.INCONCLUSIVE
    assert any(f["reason"] == "box budget" for f in budget.failures)


def test_worker_count_does_not_change_certificate():
    strip = StripSpec(Interval(6.0, 6.2), M.Const(1.0), V.FIFTH)
    one = V.verify_strip(strip, Condition.HNEG, VerifierConfig(workers=1))
    two = V.verify_strip(strip, Condition.HNEG, VerifierConfig(workers=2))
    assert one.to_json() == two.to_json()


# --- branch and p0 ---------------------------------------------------------------------------------


def test_phi_signs():
    assert V.phi(Interval(1.5)).lo > 0.0
    assert V.phi(Interval(2.3)).hi < 0.0
    assert V.phi(Interval(3.0)).lo > 0.0
    assert V.phi(Interval(2.0)).contains(0.0)


def test_isolate_p0_nests_and_validates():
    coarse = V.isolate_p0(1e-3)
    fine = V.isolate_p0(1e-6)
    assert coarse.status is Status.PROVEN and fine.status is Status.PROVEN
    assert coarse.enclosure.width <= 1e-3 and fine.enclosure.width <= 1e-6
    assert coarse.enclosure.contains(fine.enclosure)
    E = fine.enclosure
    assert V.phi(Interval(E.lo)).hi < 0.0 < V.phi(Interval(E.hi)).lo
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(DomainError):
            V.isolate_p0(bad)


def test_isolate_p0_agrees_with_float_root(oracle):
    import mpmath as mp

    root = mp.findroot(lambda p: oracle["delta0"](p) - oracle["delta1"](p), 2.57)
    assert V.isolate_p0(1e-6).enclosure.contains(float(root))


def test_window_guards():
    with pytest.raises(DomainError):
        V.verify_theorem_window(Interval(1.95, 2.05))
    with pytest.raises(DomainError):
        V.verify_theorem_window(Interval(2.55, 2.6))
    with pytest.raises(DomainError):
        V.compose_p_ge_6(Interval(5.5, 6.5))


def test_small_delta1_window():
    c = V.verify_theorem_window(Interval(3.0, 3.02))
    assert c.proven and c.extra["branch"] == "delta1" and c.extra["branch_verified"]
    assert V.recheck(c)


def test_tau_cut_bounds_tau_below_the_margin():
    P, margin = Interval(2.2, 2.3), 1e-4
    t_star, pieces = V._tau_cut(P, margin, V.DEFAULT)
    assert t_star > 0.0 and pieces >= 1
    for k in range(11):
        p = P.lo + k * P.width / 10
        assert M.tau_point(p, M.sigma_p(p) - margin) >= t_star
        assert M.constraint(p, M.sigma_p(p) - margin, t_star) < 0.0


# --- MAS probe -------------------------------------------------------------------------------


def test_probe_mas_is_labeled():
    r = V.probe_mas(Interval(2.01, 6.0), grid=20)
    assert r.label == "NOT-VERIFIED"
    d = r.to_dict()
    assert d["grid"] == 20 and len(d["samples"][0]["p"]) == 20
    with pytest.raises(DomainError):
        V.probe_mas(grid=1)


def test_endpoint_second_derivative_matches_differences():
    p, h = 3.0, 1e-4
    fd = (M.delta(p, 1.0 + 2 * h) - 2 * M.delta(p, 1.0 + h) + M.delta(p, 1.0)) / h ** 2
    assert V.d_sigma2_endpoint(p, "one") == pytest.approx(fd, rel=1e-2)
    with pytest.raises(DomainError):
        V.d_sigma2_endpoint(p, "middle")
