"""Classical map iteration, Lyapunov exponents, and Monte Carlo correlators."""

import math

import numpy as np
import pytest
from scipy import stats

from qmap import (
    DomainError,
    LyapunovReport,
    MapFamily,
    PhaseSpacePoint,
    classical_correlator,
    lyapunov_exponent,
    map_step,
    microcanonical_average,
)


def test_free_shear_step():
    # sawtooth with zero tent height has V identically zero
    fam = MapFamily("slow_ergodic", sawtooth_height=0.0)
    out = map_step(PhaseSpacePoint(0.25, 0.5), fam)
    assert (out.q, out.p) == (0.75, 0.5)


def test_chaotic_step_by_hand():
    out = map_step(PhaseSpacePoint(0.0, 0.5), MapFamily("chaotic"))
    expected = 0.5 - 0.4 / (2.0 * math.pi)
    assert out.p == pytest.approx(expected, abs=1e-12)
    assert out.q == pytest.approx(expected, abs=1e-12)
    assert out.p == pytest.approx(0.4363380, abs=1e-7)


def test_sawtooth_step_by_hand():
    out = map_step(PhaseSpacePoint(0.75, 0.0), MapFamily("slow_ergodic"))
    assert out.p == pytest.approx(0.7, abs=1e-12)
    assert out.q == pytest.approx(0.45, abs=1e-12)


def test_classical_map_ignores_r():
    # the quantization parameter carries an h^2 prefactor and is absent
    # from the classical limit
    a = map_step(PhaseSpacePoint(0.3, 0.7), MapFamily("chaotic", r=0.0))
    b = map_step(PhaseSpacePoint(0.3, 0.7), MapFamily("chaotic", r=5.0))
    assert (a.q, a.p) == (b.q, b.p)


def test_map_preserves_uniform_measure():
    rng = np.random.default_rng(99)
    n = 20_000
    pts = rng.random((n, 2))
    q, p = pts[:, 0], pts[:, 1]
    fam = MapFamily("chaotic")
    for _ in range(100):
        p = (p - (-q + (0.4 / (2 * np.pi)) * np.cos(2 * np.pi * q))) % 1.0
        q = (q + p) % 1.0
    assert stats.kstest(q, "uniform").statistic < 0.02
    assert stats.kstest(p, "uniform").statistic < 0.02


def test_chaotic_lyapunov_exponent(chaotic_lyapunov):
    rep = chaotic_lyapunov
    assert rep.lam > 0.1
    assert rep.spread < 1e-2
    # hyperbolic with stretching factor near the unperturbed value
    assert 0.85 < rep.lam < 1.05
    assert rep.seed_count == 10


def test_lyapunov_seed_independence():
    rng = np.random.default_rng(5)
    fam = MapFamily("chaotic")
    reps = []
    for _ in range(2):
        seeds = [PhaseSpacePoint(q, p) for q, p in rng.random((5, 2))]
        reps.append(lyapunov_exponent(fam, seeds, 50_000))
    gap = abs(reps[0].lam - reps[1].lam)
    assert gap <= reps[0].spread + reps[1].spread + 1e-3


def test_shear_map_has_zero_exponent():
    fam = MapFamily("slow_ergodic", sawtooth_height=0.0)
    seeds = [PhaseSpacePoint(0.1 * k, 0.07 * k) for k in range(1, 6)]
    rep = lyapunov_exponent(fam, seeds, 20_000)
    # unipotent tangent map: growth is linear in t, so the log rate decays
    # like log(t)/t, about 5e-4 here
    assert rep.lam < 1e-3


def test_regular_map_is_mostly_non_hyperbolic():
    # independent tangent-map oracle, vectorized over 100 seeds
    rng = np.random.default_rng(12)
    n, steps = 100, 10_000
    q = rng.random(n)
    p = rng.random(n)
    dq = np.full(n, 1.0 / math.sqrt(2.0))
    dp = np.full(n, 1.0 / math.sqrt(2.0))
    growth = np.zeros(n)
    for _ in range(steps):
        curv = 1.0 - 0.4 * np.sin(2.0 * np.pi * q)
        dp = dp - curv * dq
        dq = dq + dp
        norm = np.hypot(dq, dp)
        growth += np.log(norm)
        dq /= norm
        dp /= norm
        p = (p - (q + (0.4 / (2 * np.pi)) * np.cos(2 * np.pi * q))) % 1.0
        q = (q + p) % 1.0
    assert np.median(growth / steps) < 0.02


def test_lyapunov_preconditions():
    fam = MapFamily("chaotic")
    seeds = [PhaseSpacePoint(0.1 * k, 0.2 * k) for k in range(1, 6)]
    with pytest.raises(DomainError):
        lyapunov_exponent(fam, seeds, 9_999)
    with pytest.raises(DomainError):
        lyapunov_exponent(fam, seeds[:4], 10_000)


def test_ehrenfest_time():
    rep = LyapunovReport(lam=1.0, steps=10_000, seed_count=5, spread=0.0)
    assert rep.ehrenfest_time(512) == pytest.approx(math.log(2 * math.pi * 512))
    flat = LyapunovReport(lam=0.0, steps=10_000, seed_count=5, spread=0.0)
    with pytest.raises(DomainError):
        flat.ehrenfest_time(512)


def test_microcanonical_averages():
    assert microcanonical_average("cos2pi_q") == 0.0
    assert microcanonical_average("cos2pi_p") == 0.0
    assert microcanonical_average("identity") == 1.0
    with pytest.raises(DomainError):
        microcanonical_average("sin2pi_q")


def test_correlator_at_zero_lag(chaotic_classical):
    curve = chaotic_classical
    # C(0) is the sampled average of cos^2, population value 1/2
    assert curve.C[0] == pytest.approx(0.5, abs=3 * curve.stderr[0] + 1e-4)
    assert curve.a0 == 0.0
    assert curve.times[0] == 0 and curve.t_max == 25


def test_chaotic_correlations_decay(chaotic_classical):
    tail = np.abs(chaotic_classical.C[20:])
    assert np.max(tail) < 0.02


def test_correlator_seed_agreement():
    fam = MapFamily("chaotic")
    a = classical_correlator(fam, "cos2pi_q", t_max=10, samples=100_000,
                             rng_seed=1)
    b = classical_correlator(fam, "cos2pi_q", t_max=10, samples=100_000,
                             rng_seed=2)
    assert np.all(np.abs(a.C - b.C) <= 3.0 * (a.stderr + b.stderr))


def test_time_average_is_eventually_non_increasing(chaotic_classical):
    vals = [chaotic_classical.time_averaged(T) for T in (5, 10, 20, 40, 80)]
    assert np.all(np.diff(vals) <= 0.0)


def test_time_average_edge_cases(chaotic_classical):
    assert chaotic_classical.time_averaged(0.0) == chaotic_classical.C[0]
    with pytest.raises(DomainError):
        chaotic_classical.time_averaged(-1.0)


def test_correlator_values_view(chaotic_classical):
    vals = chaotic_classical.values
    assert vals[0] == (0, float(chaotic_classical.C[0]))
    assert len(vals) == 26


def test_correlator_preconditions():
    fam = MapFamily("chaotic")
    with pytest.raises(DomainError):
        classical_correlator(fam, "cos2pi_q", t_max=0, samples=10_000, rng_seed=1)
    with pytest.raises(DomainError):
        classical_correlator(fam, "cos2pi_q", t_max=5, samples=9_999, rng_seed=1)
    with pytest.raises(DomainError):
        classical_correlator(fam, "tan2pi_q", t_max=5, samples=10_000, rng_seed=1)
