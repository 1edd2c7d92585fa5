"""Tests for the angular-momentum layer.

The Clebsch-Gordan checks use sympy's independently implemented Wigner
machinery as the oracle; a handful of values computed from it are frozen
below so the suite still pins exact numbers even if sympy changes.
"""

import math

import numpy as np
import pytest
from sympy import Rational
from sympy.physics.quantum.cg import CG as SymCG

from zeemem.angular import (
    AngularMomentum,
    LevelScheme,
    SphericalPolarization,
    angular_momentum_matrices,
    clebsch_gordan,
    dipole_coupling,
    spherical_components,
)

# Frozen oracle values (sympy wigner, Condon-Shortley):
#   <1 1; 1 -1 | 0 0>  = +1/sqrt(3)
#   <1 0; 1  0 | 0 0>  = -1/sqrt(3)
#   <3/2 1/2; 1 0 | 3/2 1/2> = sqrt(15)/15
#   <4 -2; 1 1 | 4 -1> = -0.6708203932499369
#   <10 3; 1 -1 | 9 2> = +0.609449400220044
FROZEN_CG = [
    ((1, 1, 1, -1, 0, 0), 0.5773502691896257),
    ((1, 0, 1, 0, 0, 0), -0.5773502691896257),
    ((1, -1, 1, 1, 0, 0), 0.5773502691896257),
    ((1.5, 0.5, 1, 0, 1.5, 0.5), 0.2581988897471611),
    ((4, -2, 1, 1, 4, -1), -0.6708203932499369),
    ((10, 3, 1, -1, 9, 2), 0.609449400220044),
]


def _dipole_pairs(fmax):
    """All dipole-allowed (fg, fe) pairs with both spins <= fmax."""
    twof = range(0, int(2 * fmax) + 1)
    pairs = []
    for tg in twof:
        for te in twof:
            if abs(tg - te) <= 2 and (tg - te) % 2 == 0:
                pairs.append((tg / 2.0, te / 2.0))
    return pairs


class TestClebschGordan:
    def test_frozen_values(self):
        for args, expect in FROZEN_CG:
            assert clebsch_gordan(*args) == pytest.approx(expect, abs=1e-14)

    def test_matches_sympy_oracle_all_dipole_pairs_to_f4(self):
        for fg, fe in _dipole_pairs(4):
            sg = Rational(int(2 * fg), 2)
            se = Rational(int(2 * fe), 2)
            for img in range(int(2 * fg) + 1):
                mg = -fg + img
                for q in (-1, 0, 1):
                    me = mg + q
                    if abs(me) > fe:
                        continue
                    ref = float(
                        SymCG(sg, Rational(int(2 * mg), 2), 1, q, se, Rational(int(2 * me), 2))
                        .doit()
                        .evalf()
                    )
                    got = clebsch_gordan(fg, mg, 1, q, fe, me)
                    assert got == pytest.approx(ref, abs=1e-12), (fg, mg, q, fe, me)

    def test_matches_sympy_oracle_spot_checks_to_f10(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            j1 = int(rng.integers(5, 11))
            j3 = j1 + int(rng.integers(-1, 2))
            m1 = int(rng.integers(-j1, j1 + 1))
            q = int(rng.integers(-1, 2))
            m3 = m1 + q
            if abs(m3) > j3:
                continue
            ref = float(SymCG(j1, m1, 1, q, j3, m3).doit().evalf())
            assert clebsch_gordan(j1, m1, 1, q, j3, m3) == pytest.approx(ref, abs=1e-12)

    def test_selection_rules_zero(self):
        assert clebsch_gordan(1, 1, 1, 1, 0, 0) == 0.0  # m3 != m1+m2
        assert clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0  # triangle violated
        assert clebsch_gordan(0.5, 0.5, 1, 0, 1, 0.5) == 0.0  # j1+j2+j3 half-integral

    def test_rejects_invalid_spin(self):
        with pytest.raises(ValueError):
            clebsch_gordan(0.3, 0.3, 1, 0, 1, 0.3)


class TestDipoleCoupling:
    def test_shape_and_selection(self):
        scheme = LevelScheme(AngularMomentum(1), AngularMomentum(0), 1.0, -0.25)
        for q in (-1, 0, 1):
            d = dipole_coupling(scheme, q)
            assert d.shape == (1, 3)
            for ig, mg in enumerate((-1, 0, 1)):
                if mg + q != 0:
                    assert d[0, ig] == 0.0

    def test_frozen_1_to_0_values(self):
        scheme = LevelScheme(AngularMomentum(1), AngularMomentum(0), 1.0, -0.25)
        inv_sqrt3 = 1.0 / math.sqrt(3.0)
        assert dipole_coupling(scheme, -1)[0, 2] == pytest.approx(inv_sqrt3, abs=1e-15)
        assert dipole_coupling(scheme, 0)[0, 1] == pytest.approx(-inv_sqrt3, abs=1e-15)
        assert dipole_coupling(scheme, 1)[0, 0] == pytest.approx(inv_sqrt3, abs=1e-15)

    def test_completeness_every_dipole_pair_to_f4(self):
        # For each excited sublevel the squared couplings over (mg, q) sum to 1.
        for fg, fe in _dipole_pairs(4):
            if fg == fe == 0:
                continue  # no dipole moment at all; nothing to normalize
            scheme = LevelScheme(AngularMomentum(fg), AngularMomentum(fe), 1.0, 0.5)
            total = np.zeros(scheme.n_excited)
            for q in (-1, 0, 1):
                d = dipole_coupling(scheme, q)
                total += (d**2).sum(axis=1)
            assert np.allclose(total, 1.0, atol=1e-12), (fg, fe)

    def test_rejects_bad_q(self):
        scheme = LevelScheme(AngularMomentum(1), AngularMomentum(0), 1.0, -0.25)
        with pytest.raises(ValueError):
            dipole_coupling(scheme, 2)


class TestSpinMatrices:
    def test_f1_explicit(self):
        fx, fy, fz = angular_momentum_matrices(1)
        assert np.allclose(np.diag(fz), [-1.0, 0.0, 1.0])
        s = math.sqrt(2.0)
        # <m+1|F+|m> = sqrt(2) for both steps of f=1
        fplus = fx + 1j * fy
        assert fplus[1, 0] == pytest.approx(s, abs=1e-15)
        assert fplus[2, 1] == pytest.approx(s, abs=1e-15)

    @pytest.mark.parametrize("f", [0.5, 1, 1.5, 2, 3, 4])
    def test_algebra(self, f):
        fx, fy, fz = angular_momentum_matrices(f)
        for mat in (fx, fy, fz):
            assert np.allclose(mat, mat.conj().T, atol=1e-14)
        comm = fx @ fy - fy @ fx
        assert np.allclose(comm, 1j * fz, atol=1e-13)
        casimir = fx @ fx + fy @ fy + fz @ fz
        assert np.allclose(casimir, f * (f + 1) * np.eye(fz.shape[0]), atol=1e-12)


class TestSphericalComponents:
    def test_frozen_examples(self):
        s = 1.0 / math.sqrt(2.0)
        px = spherical_components((1, 0, 0))
        assert px.components == pytest.approx([s, 0.0, -s], abs=1e-15)
        pz = spherical_components((0, 0, 1))
        assert pz.components == pytest.approx([0.0, 1.0, 0.0], abs=1e-15)
        sigma_plus = spherical_components((s, 1j * s, 0))
        assert sigma_plus.components == pytest.approx([0.0, 0.0, -1.0], abs=1e-15)

    def test_norm_preserving_random(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
            pol = spherical_components(v)
            assert pol.norm == pytest.approx(np.linalg.norm(v), rel=1e-13)

    def test_constructors_are_unit(self):
        for pol in (
            SphericalPolarization.linear_x(),
            SphericalPolarization.linear_y(),
            SphericalPolarization.linear_z(),
            SphericalPolarization.sigma_plus(),
            SphericalPolarization.sigma_minus(),
        ):
            assert pol.norm == pytest.approx(1.0, abs=1e-15)

    def test_sigma_minus_is_pure_q_minus(self):
        pol = SphericalPolarization.sigma_minus()
        assert abs(pol.e_minus) == pytest.approx(1.0, abs=1e-15)
        assert abs(pol.e_zero) == 0.0
        assert abs(pol.e_plus) == 0.0

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            spherical_components((0.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            SphericalPolarization(0, 0, 0).normalized()


class TestLevelScheme:
    def test_dimensions(self):
        scheme = LevelScheme(AngularMomentum(1), AngularMomentum(0), 2.0, -0.25)
        assert scheme.n_ground == 3
        assert scheme.n_excited == 1
        assert scheme.dim == 4
        assert scheme.ground_slice == slice(0, 3)
        assert scheme.excited_slice == slice(3, 4)

    def test_accepts_plain_numbers(self):
        scheme = LevelScheme(1.5, 0.5, 1.0, 0.5)
        assert scheme.fg.multiplicity == 4

    def test_rejects_non_dipole_pair(self):
        with pytest.raises(ValueError):
            LevelScheme(AngularMomentum(2), AngularMomentum(0), 1.0, 0.5)

    def test_rejects_zero_to_zero(self):
        # F=0 -> F=0 has no dipole coupling at all
        with pytest.raises(ValueError):
            LevelScheme(AngularMomentum(0), AngularMomentum(0), 1.0, 0.5)

    def test_rejects_negative_gamma(self):
        with pytest.raises(ValueError):
            LevelScheme(AngularMomentum(1), AngularMomentum(0), -1.0, 0.5)

    def test_rejects_half_integer_mismatch(self):
        # fg integer with fe half-integer can never couple via a photon
        with pytest.raises(ValueError):
            LevelScheme(AngularMomentum(1), AngularMomentum(0.5), 1.0, 0.5)
