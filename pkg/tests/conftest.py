"""Shared fixtures for the test suite.

The production-size sweeps and spectra dominate the runtime, so everything
heavy is session-scoped and computed at most once; the acceptance gate and
the unit tests draw from the same objects.
"""

import numpy as np
import pytest

from qmap import (
    MapFamily,
    PhaseSpacePoint,
    PlanckScale,
    build_floquet,
    classical_correlator,
    diagonalize,
    lyapunov_exponent,
    quantize_observable,
    sweep_quantization,
)

LADDER = (64, 128, 256, 512)

_RESULT_LINES = []


def record_result(label: str, passed: bool, detail: str) -> None:
    """Register one verdict line for the end-of-run summary block."""
    line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
    _RESULT_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _RESULT_LINES:
        terminalreporter.section("acceptance results")
        for line in _RESULT_LINES:
            terminalreporter.write_line(line)


def _ladder_sweeps(variant: str) -> dict:
    fam = MapFamily(variant)
    return {N: sweep_quantization(fam, PlanckScale(N)) for N in LADDER}


@pytest.fixture(scope="session")
def chaotic_ladder():
    """r = 0..3 sweeps of the chaotic variant over the full N ladder."""
    return _ladder_sweeps("chaotic")


@pytest.fixture(scope="session")
def regular_ladder():
    return _ladder_sweeps("regular")


@pytest.fixture(scope="session")
def slow_ladder():
    return _ladder_sweeps("slow_ergodic")


@pytest.fixture(scope="session")
def chaotic_512():
    """(FloquetOperator, SpectralData) for the chaotic variant, r = 0, N = 512."""
    op = build_floquet(MapFamily("chaotic"), PlanckScale(512))
    return op, diagonalize(op)


@pytest.fixture(scope="session")
def cos_q_512():
    return quantize_observable("cos2pi_q", PlanckScale(512))


@pytest.fixture(scope="session")
def chaotic_spectra(chaotic_512):
    """Spectral data of the chaotic variant at r = 0 for every ladder N."""
    out = {512: chaotic_512[1]}
    for N in (64, 128, 256):
        out[N] = diagonalize(build_floquet(MapFamily("chaotic"), PlanckScale(N)))
    return out


@pytest.fixture(scope="session")
def chaotic_classical():
    """Monte Carlo C(t) for cos 2 pi q under the chaotic map, 1e6 samples."""
    return classical_correlator(MapFamily("chaotic"), "cos2pi_q",
                                t_max=25, samples=1_000_000, rng_seed=20260818)


@pytest.fixture(scope="session")
def chaotic_lyapunov():
    rng = np.random.default_rng(424242)
    seeds = [PhaseSpacePoint(q, p) for q, p in rng.random((10, 2))]
    return lyapunov_exponent(MapFamily("chaotic"), seeds, 1_000_000)
