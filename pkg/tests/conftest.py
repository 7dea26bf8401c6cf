"""Shared fixtures and high-precision reference values.

The mpmath routines below solve the constraint directly at 40 digits and
never touch the package, so they serve as independent oracles.
"""

import os

import mpmath as mp
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

mp.mp.dps = 40


def mp_sigma_p(p):
    p = mp.mpf(p)
    return (2 ** p - 1) ** (1 / p)


def mp_tau_p(p):
    p = mp.mpf(p)
    return mp.findroot(lambda t: 2 * (1 - t) ** p - 1 - t ** p, (mp.mpf(0), mp.mpf("0.36")),
                       solver="anderson")


def mp_F(p, s, t):
    p, s, t = mp.mpf(p), mp.mpf(s), mp.mpf(t)
    a0 = (1 + s ** p) ** (-1 / p)
    b0 = (1 + t ** p) ** (-1 / p)
    return (b0 - a0) ** p + (t * b0 + s * a0) ** p - 1


def mp_tau(p, s):
    p, s = mp.mpf(p), mp.mpf(s)
    if s >= mp_sigma_p(p):
        return mp.mpf(0)
    return mp.findroot(lambda t: mp_F(p, s, t), (mp.mpf(0), mp_tau_p(p)), solver="anderson")


def mp_delta(p, s):
    p, s = mp.mpf(p), mp.mpf(s)
    t = mp_tau(p, s)
    return (t + s) * (1 + s ** p) ** (-1 / p) * (1 + t ** p) ** (-1 / p)


def mp_delta0(p):
    return mp_sigma_p(p) / 2


def mp_delta1(p):
    p = mp.mpf(p)
    t = mp_tau_p(p)
    return mp.mpf(4) ** (-1 / p) * (1 + t) / (1 - t)


def mp_d_sigma(p, s):
    return mp.diff(lambda x: mp_delta(p, x), mp.mpf(s))


def mp_g(p, s):
    p, s = mp.mpf(p), mp.mpf(s)
    t = mp_tau(p, s)
    a0 = (1 + s ** p) ** (-1 / p)
    b0 = (1 + t ** p) ** (-1 / p)
    A, B = b0 - a0, t * b0 + s * a0
    return -(1 + s ** p) ** (1 + 1 / p) * (B ** (p - 1) - t ** (p - 1) * A ** (p - 1)) \
        * mp_d_sigma(p, s)


@pytest.fixture(scope="session")
def oracle():
    return {"sigma_p": mp_sigma_p, "tau_p": mp_tau_p, "tau": mp_tau, "delta": mp_delta,
            "delta0": mp_delta0, "delta1": mp_delta1, "d_sigma": mp_d_sigma, "g": mp_g,
            "F": mp_F}


# --- acceptance summary ------------------------------------------------------------------------

ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def report():
    def record(n: int, ok: bool, detail: str) -> None:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[n] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
