import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acceptorloss import constants as const
from acceptorloss.acceptor import (
    AcceptorParams,
    FieldVector,
    StrainTensor,
    TlsParams,
    build_spin_operators,
    hamiltonian_electric,
    hamiltonian_magnetic,
    hamiltonian_strain,
    level_structure,
    tls_hamiltonian,
)
from acceptorloss.errors import ValidationError

P = AcceptorParams()
strain_comp = st.floats(-1e-4, 1e-4, allow_nan=False)
field_comp = st.floats(-1.0, 1.0, allow_nan=False)
strains = st.builds(StrainTensor, *[strain_comp] * 6)
efields = st.builds(FieldVector, *[st.floats(-1e6, 1e6, allow_nan=False)] * 3)
bfields = st.builds(FieldVector, *[field_comp] * 3)


def _hermitian_err(h):
    n = np.linalg.norm(h)
    return np.linalg.norm(h - h.conj().T) / (n if n else 1.0)


class TestSpinOperators:
    def test_jz_diagonal(self):
        s = build_spin_operators()
        np.testing.assert_array_equal(s.Jz, np.diag([1.5, 0.5, -0.5, -1.5]))

    def test_commutators(self):
        jx, jy, jz = build_spin_operators()
        for a, b, c in ((jx, jy, jz), (jy, jz, jx), (jz, jx, jy)):
            np.testing.assert_allclose(a @ b - b @ a, 1j * c, atol=1e-15)

    def test_casimir(self):
        jx, jy, jz = build_spin_operators()
        np.testing.assert_allclose(jx @ jx + jy @ jy + jz @ jz, 3.75 * np.eye(4), atol=1e-14)

    def test_hermitian(self):
        for op in build_spin_operators():
            assert _hermitian_err(op) == 0

    def test_ladder_oracle(self):
        # <m'|J+|m> = sqrt(j(j+1) - m(m+1)) delta(m', m+1), rebuilt by labels
        ms = [1.5, 0.5, -0.5, -1.5]
        jp = np.zeros((4, 4))
        for col, m in enumerate(ms):
            for row, mp in enumerate(ms):
                if mp == m + 1:
                    jp[row, col] = math.sqrt(3.75 - m * (m + 1))
        s = build_spin_operators()
        np.testing.assert_allclose(s.Jx, (jp + jp.T) / 2, atol=1e-15)
        np.testing.assert_allclose(s.Jy, (jp - jp.T) / 2j, atol=1e-15)


class TestMagnetic:
    def test_zero_field(self):
        assert not np.any(hamiltonian_magnetic(P, FieldVector()))

    def test_z_field_eigenvalues(self):
        bz = 0.37
        h = hamiltonian_magnetic(P, FieldVector(z=bz))
        m = np.array([1.5, 0.5, -0.5, -1.5])
        expect = const.MU_B * bz * (P.g1 * m + P.g2 * m**3)
        np.testing.assert_allclose(np.diag(h).real, expect, rtol=1e-14)
        np.testing.assert_allclose(h - np.diag(np.diag(h)), 0, atol=1e-40)

    def test_30_gauss_half_splitting(self):
        bz = 30 * const.GAUSS
        h = hamiltonian_magnetic(P, FieldVector(z=bz)).real
        split_hz = abs(h[1, 1] - h[2, 2]) / const.H
        closed = const.MU_B * bz * abs(P.g1 + P.g2 / 4) / const.H
        assert split_hz == pytest.approx(closed, rel=1e-12)
        assert split_hz == pytest.approx(45e6, rel=0.01)

    @settings(max_examples=50, deadline=None)
    @given(bfields, st.floats(-5, 5))
    def test_linear_in_b(self, b, c):
        np.testing.assert_allclose(
            hamiltonian_magnetic(P, b * c), c * hamiltonian_magnetic(P, b), rtol=1e-12, atol=1e-40
        )

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            FieldVector(x=float("nan"))


class TestElectric:
    def test_zero_field(self):
        assert not np.any(hamiltonian_electric(P, FieldVector()))

    @settings(max_examples=50, deadline=None)
    @given(efields)
    def test_traceless_hermitian(self, e):
        h = hamiltonian_electric(P, e)
        scale = max(np.abs(h).max(), 1e-300)
        assert abs(np.trace(h)) < 1e-14 * scale
        assert _hermitian_err(h) < 1e-12

    def test_x_component_entrywise(self):
        jx, jy, jz = build_spin_operators()
        ex = 2.5e5
        expect = const.DEBYE * P.p_b / math.sqrt(3) * ex * (jy @ jz + jz @ jy)
        np.testing.assert_allclose(hamiltonian_electric(P, FieldVector(x=ex)), expect, rtol=1e-14, atol=0)

    @settings(max_examples=30, deadline=None)
    @given(efields, st.floats(-5, 5))
    def test_linear(self, e, c):
        np.testing.assert_allclose(
            hamiltonian_electric(P, e * c), c * hamiltonian_electric(P, e), rtol=1e-12, atol=1e-40
        )


class TestStrain:
    def test_zero(self):
        assert not np.any(hamiltonian_strain(P, StrainTensor()))

    def test_uniaxial(self):
        ls = level_structure(P, S=StrainTensor(Szz=1e-5))
        expect_ev = 2 * abs(P.gamma_b) * 1e-5
        assert expect_ev == pytest.approx(2.84e-5)
        assert ls.orbital_splitting_hz == pytest.approx(const.ev_to_joule(expect_ev) / const.H, rel=1e-10)
        assert ls.orbital_splitting_hz == pytest.approx(6.87e9, abs=0.01e9)

    def test_uniaxial_pair_eigenvalues(self):
        # gamma_B Szz Jz^2 has eigenvalues 9/4 and 1/4 (each twice) times gamma_B Szz
        h = hamiltonian_strain(P, StrainTensor(Szz=1e-5))
        w = np.sort(np.linalg.eigvalsh(h))
        g = const.ev_to_joule(P.gamma_b) * 1e-5
        np.testing.assert_allclose(w, np.sort([2.25 * g] * 2 + [0.25 * g] * 2), rtol=1e-12)

    def test_hydrostatic(self):
        s = 3e-5
        h = hamiltonian_strain(P, StrainTensor(s, s, s))
        np.testing.assert_allclose(h, const.ev_to_joule(P.gamma_b) * s * 3.75 * np.eye(4), rtol=1e-12, atol=1e-40)
        assert level_structure(P, S=StrainTensor(s, s, s)).orbital_splitting_hz == pytest.approx(0, abs=1e-3)

    @settings(max_examples=50, deadline=None)
    @given(strains, st.floats(-10, 10))
    def test_linear_hermitian(self, s, c):
        h = hamiltonian_strain(P, s)
        assert _hermitian_err(h) < 1e-12
        np.testing.assert_allclose(hamiltonian_strain(P, s * c), c * h, rtol=1e-12, atol=1e-40)

    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from(["Sxx", "Syy", "Szz"]), st.floats(-1e-4, 1e-4).filter(lambda x: abs(x) > 1e-9))
    def test_any_uniaxial_axis(self, axis, val):
        ls = level_structure(P, S=StrainTensor(**{axis: val}))
        expect = 2 * abs(const.ev_to_joule(P.gamma_b) * val) / const.H
        assert ls.orbital_splitting_hz == pytest.approx(expect, rel=1e-10)


class TestLevelStructure:
    def test_no_fields_fourfold(self):
        ls = level_structure(P)
        assert np.ptp(ls.eigenvalues) == 0

    def test_strain_only_kramers(self):
        ls = level_structure(P, S=StrainTensor(Szz=1e-5))
        assert ls.zeeman_lower_hz < 1 and ls.zeeman_upper_hz < 1

    def test_field_lifts_kramers_unequally(self):
        ls = level_structure(P, S=StrainTensor(Szz=1e-5), B=FieldVector(z=3e-3))
        assert ls.zeeman_lower_hz > 1e6 and ls.zeeman_upper_hz > 1e6
        assert abs(ls.zeeman_lower_hz - ls.zeeman_upper_hz) > 1e6

    @settings(max_examples=50, deadline=None)
    @given(strains, efields, bfields)
    def test_matches_dense_diagonalization(self, s, e, b):
        ls = level_structure(P, s, e, b)
        h = hamiltonian_strain(P, s) + hamiltonian_electric(P, e) + hamiltonian_magnetic(P, b)
        ref = np.sort(np.linalg.eigvals(h).real)
        scale = max(np.abs(ref).max(), 1e-30)
        assert np.all(np.diff(ls.eigenvalues) >= 0)
        np.testing.assert_allclose(ls.eigenvalues, ref, rtol=0, atol=1e-10 * scale)

    @settings(max_examples=50, deadline=None)
    @given(strains)
    def test_eigenvectors(self, s):
        ls = level_structure(P, s)
        h = ls.hamiltonian
        v = ls.eigenvectors
        scale = max(np.abs(ls.eigenvalues).max(), 1e-40)
        np.testing.assert_allclose(h @ v, v * ls.eigenvalues, atol=1e-10 * scale)


class TestTls:
    def test_unperturbed(self):
        t = TlsParams(eps0=3e9, delta0=4e9)
        h = tls_hamiltonian(t)
        de = const.H * 5e9
        np.testing.assert_allclose(h, np.diag([de / 2, -de / 2]), rtol=1e-14)

    def test_symmetric_well_transverse(self):
        t = TlsParams(eps0=0.0, delta0=5e9)
        s, e = 1e-6, 10.0
        h = tls_hamiltonian(t, S=s, E=e) - tls_hamiltonian(t)
        coupling = const.ev_to_joule(t.gamma) * s + const.debye_to_si(t.p) * e
        np.testing.assert_allclose(h, coupling * np.array([[0, 1], [1, 0]]), rtol=1e-12)

    def test_equal_asymmetry_and_tunneling(self):
        t = TlsParams(eps0=2e9, delta0=2e9)
        h = tls_hamiltonian(t, S=1e-6) - tls_hamiltonian(t)
        assert h[0, 0].real == pytest.approx(h[0, 1].real, rel=1e-12)

    def test_zero_splitting_rejected(self):
        with pytest.raises(ValidationError):
            tls_hamiltonian(TlsParams(0.0, 0.0))

    def test_negative_tunneling_rejected(self):
        with pytest.raises(ValidationError):
            TlsParams(1e9, -1.0)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-1e10, 1e10), st.floats(1e6, 1e10), st.floats(-1e-5, 1e-5), st.floats(-1e3, 1e3))
    def test_hermitian(self, eps0, delta0, s, e):
        assert _hermitian_err(tls_hamiltonian(TlsParams(eps0, delta0), s, e)) < 1e-12
