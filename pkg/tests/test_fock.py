import math

import mpmath
import numpy as np
import pytest

from kerrcoupler.analytic import classical_trajectory, normally_ordered_moment
from kerrcoupler.core import CouplerParams, InitialAmplitudes
from kerrcoupler.fock import (
    CutoffError,
    FockMomentSource,
    auto_cutoff,
    build_blocks,
    energy,
    evolve,
    oracle_moment,
    oracle_moment_source,
    prepare_coherent,
    total_photons,
)
from kerrcoupler.squeezing import Difference, SingleModeNth, Sum, factor_arrays

from conftest import dense_evolved, dense_moment


def poisson_tail_cutoff(eps, tol):
    """Reference cutoff from a 50-digit cumulative Poisson sum."""
    mpmath.mp.dps = 50
    eps = mpmath.mpf(eps)
    cdf = mpmath.mpf(0)
    n = 0
    while True:
        cdf += mpmath.exp(-eps) * eps ** n / mpmath.factorial(n)
        if 1 - cdf < tol:
            return n
        n += 1


# frozen from poisson_tail_cutoff
@pytest.mark.parametrize("eps, expected", [(4.0, 25), (0.18, 8), (5.0, 27), (13.0, 45), (0.45, 11)])
def test_auto_cutoff_frozen(eps, expected):
    assert auto_cutoff(eps, 1e-12) == expected


@pytest.mark.parametrize("eps", [0.01, 0.5, 2.0, 7.3, 20.0])
@pytest.mark.parametrize("tol", [1e-6, 1e-12])
def test_auto_cutoff_matches_poisson_sum(eps, tol):
    assert auto_cutoff(eps, tol) == poisson_tail_cutoff(eps, tol)


def test_auto_cutoff_edges():
    assert auto_cutoff(0.0, 1e-3) == 0
    for bad in (0.0, 1.0, -1.0):
        with pytest.raises(ValueError):
            auto_cutoff(1.0, bad)


def test_prepare_vacuum():
    st = prepare_coherent(InitialAmplitudes(0, 0), 0)
    assert st.tail_mass == 0
    assert len(st.blocks) == 1 and st.blocks[0][0] == 1


def test_prepare_coefficients():
    st = prepare_coherent(InitialAmplitudes(2, 0), 30)
    assert st.blocks[0][0] == pytest.approx(math.exp(-2), abs=1e-15)
    st = prepare_coherent(InitialAmplitudes(1, 1), 10)
    # block N=2, j=1 <-> (n1, n2) = (1, 1)
    assert st.blocks[2][1] == pytest.approx(math.exp(-1), abs=1e-15)


def test_prepare_norm_matches_tail():
    for a1, a2 in [(2, 0), (0.3, 0.6), (1 + 1j, -0.5)]:
        init = InitialAmplitudes(a1, a2)
        st = prepare_coherent(init, auto_cutoff(init.epsilon(), 1e-12))
        assert st.norm() == pytest.approx(1 - st.tail_mass, abs=1e-14)


def test_blocks_small_cases():
    blocks = build_blocks(CouplerParams(1.0, 0.5, 0.0), 2)
    assert blocks[0].matrix.shape == (1, 1) and blocks[0].matrix[0, 0] == 0
    np.testing.assert_array_equal(blocks[1].matrix, [[0, 1], [1, 0]])
    h2 = blocks[2].matrix
    np.testing.assert_allclose(np.diag(h2), [1, 1, 1])
    np.testing.assert_allclose(np.diag(h2, 1), [math.sqrt(2)] * 2)
    # eigenvalues of 1 + sqrt(2) * path-graph(3): {1 - 2, 1, 1 + 2}
    np.testing.assert_allclose(blocks[2].eigenvalues, [-1, 1, 3], atol=1e-14)


def test_block_kerr_diagonal_identity():
    p = CouplerParams(0.0, 0.37, 3.0)
    for h in build_blocks(p, 12):
        n = h.total
        j = np.arange(n + 1)
        expected = 0.37 * n * (n - 1) + 1.5 * ((n - j) - j)
        np.testing.assert_allclose(np.diag(h.matrix), expected, atol=1e-12)


def test_blocks_hermitian_and_unitary():
    for h in build_blocks(CouplerParams(2.0, 1.0, 50.0), 40):
        m = h.matrix
        assert np.max(np.abs(m - m.conj().T)) < 1e-14
        v = h.eigenvectors
        assert np.max(np.abs(v @ v.conj().T - np.eye(len(v)))) < 1e-12


def test_evolve_identity_at_zero():
    init = InitialAmplitudes(0.5, 1j)
    st = prepare_coherent(init, 20)
    out = evolve(st, build_blocks(CouplerParams(1.0, 0.5, 5.0), 20), 0.0)
    for a, b in zip(st.blocks, out.blocks):
        np.testing.assert_allclose(a, b, atol=1e-15)


def test_evolve_dimension_mismatch():
    st = prepare_coherent(InitialAmplitudes(1, 0), 10)
    with pytest.raises(ValueError):
        evolve(st, build_blocks(CouplerParams(1, 0.5), 9), 1.0)


def _fidelity(a, b):
    overlap = sum(np.vdot(x, y) for x, y in zip(a.blocks, b.blocks))
    return abs(overlap) ** 2 / (a.norm() * b.norm())


def test_linear_beamsplitter_keeps_coherence():
    n_max = 40
    st = prepare_coherent(InitialAmplitudes(2, 0), n_max)
    out = evolve(st, build_blocks(CouplerParams(1.0, 0.0, 0.0), n_max), math.pi / 2)
    target = prepare_coherent(InitialAmplitudes(0, -2j), n_max)
    assert _fidelity(out, target) > 1 - 1e-9


@pytest.mark.parametrize("a1, a2", [(2, 0), (1, 1), (0.3, 1.9)])
def test_kerr_revival_restores_coherent_moments(a1, a2):
    p = CouplerParams(1.0, 0.5, 0.0)
    init = InitialAmplitudes(a1, a2)
    t = 2 * math.pi  # chi t = pi
    fock = FockMomentSource(p, init, t)
    tr = classical_trajectory(p, init, t)
    for idx in [(0, 1, 0, 0), (0, 2, 0, 1), (1, 3, 0, 0), (2, 0, 1, 2), (1, 1, 1, 1)]:
        n1, n2, n3, n4 = idx
        coherent = (tr.a1bar ** n2 * tr.a2bar ** n4
                    * np.conj(tr.a1bar) ** n1 * np.conj(tr.a2bar) ** n3)
        assert fock.normally_ordered_moment(idx) == pytest.approx(coherent, abs=1e-9)


def test_oracle_moment_examples():
    vac = prepare_coherent(InitialAmplitudes(0, 0), 4)
    assert oracle_moment(vac, (1, 1, 0, 0)) == 0
    st = prepare_coherent(InitialAmplitudes(2, 0), 33)
    assert abs(oracle_moment(st, (1, 1, 0, 0)) - 4) < 1e-10
    p = CouplerParams(1.0, 0.5, 0.0)
    init = InitialAmplitudes(2, 0)
    src = oracle_moment_source(p, init, 0.8)
    assert src.normally_ordered_moment((0, 2, 0, 0)) == pytest.approx(
        normally_ordered_moment(p, init, 0.8, (0, 2, 0, 0)), abs=1e-8)


@pytest.mark.parametrize("idx", [(0, 1, 0, 0), (1, 2, 0, 1), (0, 2, 2, 0), (2, 2, 1, 1)])
def test_oracle_matches_dense_expm(idx):
    p = CouplerParams(0.8, 0.4, 3.0)
    init = InitialAmplitudes(0.7, -0.5j)
    t = 1.7
    psi, ops = dense_evolved(p, init, t, d=22)
    fock = FockMomentSource(p, init, t)
    assert fock.normally_ordered_moment(idx) == pytest.approx(dense_moment(psi, ops, idx), abs=1e-10)


def test_cutoff_guard_names_index():
    st = prepare_coherent(InitialAmplitudes(2, 0), 12)
    with pytest.raises(CutoffError, match=r"\(0,4,0,0\)"):
        oracle_moment(st, (0, 4, 0, 0))
    with pytest.raises(CutoffError):
        FockMomentSource(CouplerParams(1, 0.5), InitialAmplitudes(2, 0), 1.0, n_max=12)\
            .normally_ordered_moment((2, 2, 0, 0))


def test_time_batched_evolution_matches_pointwise():
    p = CouplerParams(1.0, 0.5, 50.0)
    init = InitialAmplitudes(0.3, 0.6)
    t = np.linspace(0, 3, 11)
    batch = FockMomentSource(p, init, t)
    for k in (0, 4, 10):
        single = FockMomentSource(p, init, t[k])
        assert batch.normally_ordered_moment((1, 2, 0, 1))[k] == pytest.approx(
            single.normally_ordered_moment((1, 2, 0, 1)), abs=1e-14)


@pytest.mark.parametrize("params, init", [
    (CouplerParams(1.0, 0.5, 0.0), InitialAmplitudes(2, 0)),
    (CouplerParams(2.0, 1.0, 50.0), InitialAmplitudes(1.5, 1.6)),
    (CouplerParams(0.5, 0.5, 5.0), InitialAmplitudes(0.3, 0.6)),
])
def test_conservation_laws(params, init):
    n_max = auto_cutoff(init.epsilon(), 1e-12) + 8
    blocks = build_blocks(params, n_max)
    st0 = prepare_coherent(init, n_max)
    t = np.linspace(0, 10, 101)
    st = evolve(st0, blocks, t)
    assert np.max(np.abs(st.norm() - st0.norm())) < 1e-10
    assert np.max(np.abs(total_photons(st) - total_photons(st0))) < 1e-9
    # truncated Poisson mean stands in for eps times the tail correction
    assert abs(total_photons(st0) - init.epsilon()) < 1e-9
    e0 = energy(st0, blocks)
    assert np.max(np.abs(energy(st, blocks) - e0)) <= 1e-9 * max(1.0, abs(e0))


def test_linear_limit_matches_unitary_trajectory():
    p = CouplerParams(1.0, 0.0, 50.0)
    init = InitialAmplitudes(0.3, 0.6)
    t = np.linspace(0, 5, 41)
    fock = FockMomentSource(p, init, t)
    tr = classical_trajectory(p, init, t)
    np.testing.assert_allclose(fock.normally_ordered_moment((0, 1, 0, 0)), tr.a1bar, atol=1e-9)
    np.testing.assert_allclose(fock.normally_ordered_moment((0, 0, 0, 1)), tr.a2bar, atol=1e-9)


@pytest.mark.parametrize("spec", [SingleModeNth(1, 2), Sum(), Difference()])
def test_source_at_zero_matches_analytic(spec):
    from kerrcoupler.analytic import AnalyticMomentSource
    p = CouplerParams(1.0, 0.5, 50.0)
    init = InitialAmplitudes(1.2, -0.7)
    a = factor_arrays(spec, AnalyticMomentSource(p, init, 0.0))
    f = factor_arrays(spec, FockMomentSource(p, init, 0.0))
    for key in ("s", "q", "raw_s", "raw_q"):
        assert abs(float(a[key]) - float(f[key])) < 1e-9
