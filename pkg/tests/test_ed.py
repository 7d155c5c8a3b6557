import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from decaybound import ed
from decaybound.exceptions import InputError, ResourceError
from decaybound.lattice import make_lattice
from decaybound.models import ModelSpec

EDGE = make_lattice("chain", 2)


@pytest.mark.parametrize("s", [0.5, 1, 1.5, 2])
def test_spin_algebra(s):
    S = ed.spin_matrices(s)
    comm = S.S1 @ S.S2 - S.S2 @ S.S1
    assert np.allclose(comm, 1j * S.S3)
    casimir = S.S1 @ S.S1 + S.S2 @ S.S2 + S.S3 @ S.S3
    assert np.allclose(casimir, s * (s + 1) * np.eye(S.dim))


@pytest.mark.parametrize("theta", [2, 3, 4])
def test_loop_operators(theta):
    T, Q = ed.transposition(theta), ed.double_bar(theta)
    assert np.allclose(T @ T, np.eye(theta**2))
    assert np.allclose(Q @ Q, theta * Q)
    assert ed.spectral_norm(Q) == pytest.approx(theta)


def test_two_site_spectra():
    cases = [
        (ed.build_spin_hamiltonian(EDGE, 0.5, (1.0,)), [-0.25, -0.25, -0.25, 0.75]),
        (ed.build_loop_hamiltonian(EDGE, 2, 1.0), [0, 0, 0, 2]),
        (ed.build_hubbard(make_lattice("chain", 1), 1.0, 5.0, U=1.0), [0, 0, 0, 1]),
    ]
    for H, expected in cases:
        assert np.allclose(np.linalg.eigvalsh(H), expected)


def test_tj_free_hopping_spectrum_is_symmetric():
    E = np.linalg.eigvalsh(ed.build_tj(EDGE, 1.0, 0.0))
    assert np.allclose(np.sort(E), np.sort(-E))


def test_fermion_anticommutators():
    f = ed.FermionOps(2)
    modes = [(s, x) for x in range(2) for s in range(2)]
    eye = np.eye(16)
    for a in modes:
        for b in modes:
            ca, cb = f.c[a[0]][a[1]].toarray(), f.c[b[0]][b[1]].toarray()
            assert np.allclose(ca @ cb + cb @ ca, 0)
            assert np.allclose(ca @ cb.T + cb.T @ ca, eye if a == b else 0)


def test_heisenberg_dimer_correlator():
    # H = -S.S on two spins 1/2: triplet at -1/4, singlet at 3/4
    spec = ModelSpec("spin_su2", graph=EDGE)
    beta = 1.3
    c = ed.standard_correlators(spec, 0, 1, beta)
    w_t, w_s = math.exp(beta / 4), math.exp(-3 * beta / 4)
    expected = (w_t / 4 - w_s / 4) / (3 * w_t + w_s)
    assert c["S3S3"].real == pytest.approx(expected, abs=1e-13)
    assert c["S+S-"].real == pytest.approx(2 * expected, abs=1e-13)


@settings(max_examples=15, deadline=None)
@given(beta=st.floats(0.01, 5), U=st.floats(-3, 3), mu=st.floats(-1, 1))
def test_partition_function_matches_expm(beta, U, mu):
    H = ed.build_hubbard(EDGE, 1.0, 5.0, U=U, mu=mu)
    spectrum = ed.Spectrum(H)
    assert spectrum.partition_function(beta) == pytest.approx(np.trace(expm(-beta * H)), rel=1e-10)


def test_gibbs_expectation_matches_dense_formula():
    spec = ModelSpec("tj", graph=make_lattice("chain", 3), t=1.0, J=0.5)
    ops = ed.ModelOperators(spec)
    H = ops.hamiltonian()
    rho = expm(-0.8 * H)
    rho /= np.trace(rho)
    O = ops.correlator("single_particle", 0, 2)
    value = ed.Spectrum(H).gibbs(0.8).expect(O)
    assert value == pytest.approx(np.trace(rho @ O.toarray()), abs=1e-12)
    spectrum = ed.Spectrum(H)
    assert spectrum.thermal_average(spectrum.diagonal(O), 0.8) == pytest.approx(value, abs=1e-12)


def test_low_temperature_picks_ground_state():
    H = ed.build_spin_hamiltonian(make_lattice("chain", 4), 0.5, (-1.0,))
    spectrum = ed.Spectrum(H)
    energy = spectrum.gibbs(spectrum.ground_state_beta()).expect(H)
    assert energy.real == pytest.approx(spectrum.energies[0], abs=1e-9)


def test_dimension_cap(monkeypatch):
    monkeypatch.setenv(ed.MAX_DIM_ENV, "64")
    with pytest.raises(ResourceError):
        ed.ModelOperators(ModelSpec("spin_su2", graph=make_lattice("chain", 7)))
    monkeypatch.setenv(ed.MAX_DIM_ENV, "lots")
    with pytest.raises(InputError):
        ed.max_dim()


def test_non_hermitian_rejected():
    with pytest.raises(InputError):
        ed.Spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hubbard_hopping_decays_with_distance():
    spec = ModelSpec("hubbard", graph=make_lattice("chain", 3), t=1.0, alpha=5.0)
    ops = ed.ModelOperators(spec)
    near, far = (ops.term_matrix(t) for t in ops.terms if t.support in ({0, 1}, {0, 2}))
    assert ed.spectral_norm(far) / ed.spectral_norm(near) == pytest.approx((2 / 3) ** 5)
