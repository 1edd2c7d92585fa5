"""Angular-momentum algebra for degenerate two-level transitions.

Spin matrices, Clebsch-Gordan dipole couplings, and the spherical
decomposition of polarization vectors. Basis convention throughout the
package: Zeeman sublevels ordered m = -f..+f, ground manifold first,
then the excited manifold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "AngularMomentum",
    "LevelScheme",
    "SphericalPolarization",
    "angular_momentum_matrices",
    "clebsch_gordan",
    "dipole_coupling",
    "spherical_components",
]

_SQRT2 = math.sqrt(2.0)


def _twice(value, *, name="f") -> int:
    """Return 2*value as an exact int, rejecting non-half-integers."""
    doubled = 2.0 * float(value)
    rounded = round(doubled)
    if abs(doubled - rounded) > 1e-9:
        raise ValueError(f"{name} must be an integer or half-integer, got {value!r}")
    return int(rounded)


@dataclass(frozen=True)
class AngularMomentum:
    """A total angular momentum quantum number f (integer or half-integer)."""

    f: float

    def __post_init__(self):
        twof = _twice(self.f)
        if twof < 0:
            raise ValueError(f"f must be non-negative, got {self.f!r}")
        object.__setattr__(self, "f", twof / 2.0)

    @property
    def multiplicity(self) -> int:
        return _twice(self.f) + 1

    @property
    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order m = -f..+f."""
        return -self.f + np.arange(self.multiplicity, dtype=float)


def _as_spin(f) -> AngularMomentum:
    return f if isinstance(f, AngularMomentum) else AngularMomentum(float(f))


@dataclass(frozen=True)
class LevelScheme:
    """A ground manifold fg coupled to an excited manifold fe.

    gamma is the excited-state population decay rate as an angular
    frequency (rad/s). gamma = 0 is allowed as an idealization for
    closed (decay-free) test dynamics. g-factors are dimensionless;
    the excited-state one defaults to 0 (no excited Zeeman splitting).
    """

    fg: AngularMomentum
    fe: AngularMomentum
    gamma: float
    g_ground: float
    g_excited: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "fg", _as_spin(self.fg))
        object.__setattr__(self, "fe", _as_spin(self.fe))
        if (
            abs(self.fg.f - self.fe.f) > 1.0
            or (_twice(self.fg.f) - _twice(self.fe.f)) % 2
            or (self.fg.f == 0.0 and self.fe.f == 0.0)
        ):
            raise ValueError(
                f"transition fg={self.fg.f} -> fe={self.fe.f} is not dipole allowed"
            )
        if not (self.gamma >= 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be a finite rate >= 0, got {self.gamma!r}")

    @property
    def n_ground(self) -> int:
        return self.fg.multiplicity

    @property
    def n_excited(self) -> int:
        return self.fe.multiplicity

    @property
    def dim(self) -> int:
        return self.n_ground + self.n_excited

    @property
    def ground_slice(self) -> slice:
        return slice(0, self.n_ground)

    @property
    def excited_slice(self) -> slice:
        return slice(self.n_ground, self.dim)


def angular_momentum_matrices(f):
    """Spin matrices (fx, fy, fz) for spin f in the m = -f..+f basis.

    fz is diagonal with entries m; the ladder operators have elements
    <m±1|F±|m> = sqrt(f(f+1) - m(m±1)). All three returned matrices are
    Hermitian and satisfy [fx, fy] = i fz.
    """
    f = _as_spin(f).f
    n = _twice(f) + 1
    m = -f + np.arange(n, dtype=float)
    fz = np.diag(m).astype(complex)
    fplus = np.zeros((n, n), dtype=complex)
    for i in range(n - 1):
        fplus[i + 1, i] = math.sqrt(f * (f + 1.0) - m[i] * (m[i] + 1.0))
    fminus = fplus.conj().T
    fx = (fplus + fminus) / 2.0
    fy = (fplus - fminus) / 2.0j
    return fx, fy, fz


def _fact2(twice_n: int) -> int:
    """Factorial of an integer supplied as its doubled value."""
    if twice_n % 2:
        raise ValueError("factorial argument is not an integer")
    return math.factorial(twice_n // 2)


@lru_cache(maxsize=None)
def _cg_exact(twoj1, twom1, twoj2, twom2, twoj3, twom3) -> float:
    # Selection rules: anything violating them is exactly zero.
    if twom1 + twom2 != twom3:
        return 0.0
    if not abs(twoj1 - twoj2) <= twoj3 <= twoj1 + twoj2:
        return 0.0
    if (twoj1 + twoj2 + twoj3) % 2:
        return 0.0
    if abs(twom1) > twoj1 or abs(twom2) > twoj2 or abs(twom3) > twoj3:
        return 0.0
    if (twoj1 + twom1) % 2 or (twoj2 + twom2) % 2 or (twoj3 + twom3) % 2:
        return 0.0

    # Racah sum with exact integer arithmetic; the final result is the
    # only floating-point rounding step, so values are good to one ulp
    # even for large f.
    delta = Fraction(
        _fact2(twoj1 + twoj2 - twoj3)
        * _fact2(twoj1 - twoj2 + twoj3)
        * _fact2(-twoj1 + twoj2 + twoj3),
        _fact2(twoj1 + twoj2 + twoj3 + 2),
    )
    norm = (
        Fraction(twoj3 + 1)
        * delta
        * _fact2(twoj1 + twom1)
        * _fact2(twoj1 - twom1)
        * _fact2(twoj2 + twom2)
        * _fact2(twoj2 - twom2)
        * _fact2(twoj3 + twom3)
        * _fact2(twoj3 - twom3)
    )

    total = Fraction(0)
    k = 0
    while True:
        args2 = (
            twoj1 + twoj2 - twoj3 - 2 * k,
            twoj1 - twom1 - 2 * k,
            twoj2 + twom2 - 2 * k,
            twoj3 - twoj2 + twom1 + 2 * k,
            twoj3 - twoj1 - twom2 + 2 * k,
        )
        if min(args2[:3]) < 0:
            break
        if min(args2) >= 0:
            den = math.factorial(k)
            for a in args2:
                den *= _fact2(a)
            total += Fraction(-1 if k % 2 else 1, den)
        k += 1

    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(norm * total * total))


def clebsch_gordan(j1, m1, j2, m2, j3, m3) -> float:
    """<j1 m1; j2 m2 | j3 m3> in the Condon-Shortley phase convention.

    Accepts integer and half-integer arguments; returns 0.0 whenever a
    selection rule (m3 = m1 + m2, triangle inequality, integral j1+j2+j3)
    is violated.
    """
    return _cg_exact(
        _twice(j1, name="j1"),
        _twice(m1, name="m1"),
        _twice(j2, name="j2"),
        _twice(m2, name="m2"),
        _twice(j3, name="j3"),
        _twice(m3, name="m3"),
    )


@lru_cache(maxsize=None)
def _dipole_coupling_cached(twofg: int, twofe: int, q: int) -> np.ndarray:
    ng = twofg + 1
    ne = twofe + 1
    out = np.zeros((ne, ng))
    for ie in range(ne):
        twome = -twofe + 2 * ie
        for ig in range(ng):
            twomg = -twofg + 2 * ig
            if twomg + 2 * q != twome:
                continue
            out[ie, ig] = _cg_exact(twofg, twomg, 2, 2 * q, twofe, twome)
    out.setflags(write=False)
    return out


def dipole_coupling(scheme: LevelScheme, q: int) -> np.ndarray:
    """Relative dipole amplitudes for spherical polarization q.

    Returns the (2fe+1) x (2fg+1) real matrix whose (me, mg) element is
    <fg mg; 1 q | fe me>, i.e. the transition amplitude with the reduced
    matrix element normalized to 1. Nonzero only for me = mg + q. The
    returned array is cached and read-only.
    """
    if q not in (-1, 0, 1):
        raise ValueError(f"q must be -1, 0 or +1, got {q!r}")
    return _dipole_coupling_cached(_twice(scheme.fg.f), _twice(scheme.fe.f), q)


@dataclass(frozen=True)
class SphericalPolarization:
    """Spherical components (q = -1, 0, +1) of a unit polarization vector.

    Components are expansion coefficients on the spherical unit vectors
    ê_{+1} = -(x̂ + iŷ)/√2, ê_0 = ẑ, ê_{-1} = (x̂ - iŷ)/√2, so σ+ light
    carries pure q = +1 and drives Δm = +1 transitions.
    """

    e_minus: complex
    e_zero: complex
    e_plus: complex

    def __post_init__(self):
        object.__setattr__(self, "e_minus", complex(self.e_minus))
        object.__setattr__(self, "e_zero", complex(self.e_zero))
        object.__setattr__(self, "e_plus", complex(self.e_plus))

    @property
    def components(self) -> np.ndarray:
        """Array [e_minus, e_zero, e_plus]."""
        return np.array([self.e_minus, self.e_zero, self.e_plus])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def normalized(self) -> "SphericalPolarization":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize a zero polarization vector")
        # fixed point for already-normalized vectors so repeated
        # normalization cannot drift the stored components
        if abs(n - 1.0) <= 4e-16:
            return self
        return SphericalPolarization(self.e_minus / n, self.e_zero / n, self.e_plus / n)

    @staticmethod
    def linear_x() -> "SphericalPolarization":
        return spherical_components((1.0, 0.0, 0.0))

    @staticmethod
    def linear_y() -> "SphericalPolarization":
        return spherical_components((0.0, 1.0, 0.0))

    @staticmethod
    def linear_z() -> "SphericalPolarization":
        return spherical_components((0.0, 0.0, 1.0))

    @staticmethod
    def sigma_plus() -> "SphericalPolarization":
        return spherical_components((1.0 / _SQRT2, 1.0j / _SQRT2, 0.0))

    @staticmethod
    def sigma_minus() -> "SphericalPolarization":
        return spherical_components((1.0 / _SQRT2, -1.0j / _SQRT2, 0.0))


def spherical_components(cartesian) -> SphericalPolarization:
    """Decompose a cartesian (possibly complex) vector onto the spherical basis.

    e_{+1} = -(e_x - i e_y)/√2, e_0 = e_z, e_{-1} = (e_x + i e_y)/√2.
    The map is norm preserving. Rejects vectors that are not 3-component
    or have zero norm.
    """
    vec = np.asarray(cartesian, dtype=complex)
    if vec.shape != (3,):
        raise ValueError(f"polarization must be a 3-vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec.view(float))):
        raise ValueError("polarization components must be finite")
    ex, ey, ez = vec
    pol = SphericalPolarization(
        e_minus=(ex + 1j * ey) / _SQRT2,
        e_zero=ez,
        e_plus=-(ex - 1j * ey) / _SQRT2,
    )
    if pol.norm == 0.0:
        raise ValueError("polarization vector must be nonzero")
    return pol
