"""Kicked-map families on the unit torus and their quantization parameter.

Three one-kick-per-period map families are supported, each defined by a
kinetic function T(p) and a kick potential V(q) on [0, 1):

  chaotic       V(q) = -q^2/2 + (0.4/(2 pi)^2) sin(2 pi q) + r h^2 cos(2 pi q)
  regular       V(q) = +q^2/2 + (0.4/(2 pi)^2) sin(2 pi q) + r h^2 cos(2 pi q)
  slow_ergodic  V(q) = 0.3 |q - 1/2|,  T(p) = p^2/2 + r h^2 cos(2 pi p)

The sin term breaks parity and makes the dynamics generic; the dimensionless
parameter r selects one member of a family of quantizations that share the
same classical limit, since the r term carries an explicit h^2 = 1/N^2
prefactor and vanishes as N grows.  Classical (h-independent) evaluation
drops the r term entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigurationError, DomainError

VARIANTS = ("chaotic", "regular", "slow_ergodic")

# amplitude of the parity-breaking sin(2 pi q) term
SIN_AMPLITUDE = 0.4 / (2.0 * math.pi) ** 2

#: default tent height of the slow-ergodic sawtooth potential
SAWTOOTH_HEIGHT = 0.3


@dataclass(frozen=True)
class MapFamily:
    """One kicked-map family together with its quantization parameter r.

    ``sawtooth_height`` rescales the slow-ergodic tent potential and exists
    so degenerate configurations (V identically zero, free shear) can be
    built for testing; physical runs leave it at the default.
    """

    variant: str
    r: float = 0.0
    sawtooth_height: float = SAWTOOTH_HEIGHT

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(
                f"model: unknown variant {self.variant!r}, expected one of {VARIANTS}"
            )

    @property
    def quadratic_sign(self) -> float:
        """Sign of the q^2/2 term; the - sign gives fully chaotic dynamics."""
        if self.variant == "chaotic":
            return -1.0
        if self.variant == "regular":
            return +1.0
        return 0.0

    @property
    def perturbation_site(self) -> str:
        """Where the r h^2 cos term lives: 'position' (in V) or 'momentum' (in T)."""
        return "momentum" if self.variant == "slow_ergodic" else "position"


@dataclass(frozen=True)
class PlanckScale:
    """Hilbert-space dimension N with h = 1/N and hbar = 1/(2 pi N)."""

    N: int
    h: float = field(init=False)
    hbar: float = field(init=False)

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 2:
            raise ConfigurationError(f"model: N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "h", 1.0 / self.N)
        object.__setattr__(self, "hbar", 1.0 / (2.0 * math.pi * self.N))


def require_even_dimension(family: MapFamily, scale: PlanckScale) -> None:
    """Reject odd N for variants with a quadratic V or T term.

    The kick/free phases exp(-2 pi i N x^2/2) at grid x_j = j/N are
    single-valued under j -> j + N only for even N.  All three variants
    carry T(p) = p^2/2, so the constraint applies throughout.
    """
    if scale.N % 2 != 0:
        raise ConfigurationError(
            f"model: variant {family.variant!r} has a quadratic kinetic/potential "
            f"term; N must be even, got N={scale.N}"
        )


@dataclass(frozen=True)
class PhaseSpacePoint:
    """A point on the torus; both coordinates are reduced mod 1 on construction."""

    q: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "q", self.q % 1.0)
        object.__setattr__(self, "p", self.p % 1.0)


def evaluate(family: MapFamily, component: str, x: float,
             scale: PlanckScale | None = None) -> float:
    """Evaluate V, V' or T for a family at a point of [0, 1).

    The r h^2 perturbation requires a PlanckScale; asking for any component
    of a family with r != 0 without one is a configuration error.  The
    sawtooth derivative uses V'(q) = 0.3 sign(q - 1/2) with V'(1/2) := 0.
    """
    if not (0.0 <= x < 1.0):
        raise DomainError(f"model: coordinate {x!r} outside [0, 1)")
    if family.r != 0.0 and scale is None:
        raise ConfigurationError(
            "model: r != 0 requires a PlanckScale (perturbation amplitude is r h^2)"
        )
    h2 = scale.h ** 2 if scale is not None else 0.0
    pert = family.r * h2

    if component == "V":
        if family.variant == "slow_ergodic":
            return family.sawtooth_height * abs(x - 0.5)
        return (family.quadratic_sign * x * x / 2.0
                + SIN_AMPLITUDE * math.sin(2.0 * math.pi * x)
                + pert * math.cos(2.0 * math.pi * x))
    if component == "Vprime":
        if family.variant == "slow_ergodic":
            if x == 0.5:
                return 0.0
            return family.sawtooth_height * math.copysign(1.0, x - 0.5)
        return (family.quadratic_sign * x
                + 2.0 * math.pi * SIN_AMPLITUDE * math.cos(2.0 * math.pi * x)
                - 2.0 * math.pi * pert * math.sin(2.0 * math.pi * x))
    if component == "T":
        if family.variant == "slow_ergodic":
            return x * x / 2.0 + pert * math.cos(2.0 * math.pi * x)
        return x * x / 2.0
    raise DomainError(f"model: unknown component {component!r}, expected V, Vprime or T")
