"""Brute-force two-mode evolution in a truncated Fock basis.

The Hamiltonian conserves the total photon number N = n1 + n2, so the
state is stored as one amplitude vector per N-block (index j <-> n1 = N - j,
n2 = j) and each block is propagated through its own cached eigenbasis.
A trailing batch axis on the amplitudes carries many time points at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.stats import poisson

from .core import CouplerParams, InitialAmplitudes, MomentIndex, as_index, epsilon

DEFAULT_TAIL_TOLERANCE = 1e-12
GUARD_TAIL_TOLERANCE = 1e-10


class CutoffError(RuntimeError):
    """A moment needs amplitudes beyond the cutoff with non-negligible weight."""

    def __init__(self, idx, tail):
        self.idx = idx
        self.tail = tail
        super().__init__(
            f"moment index {idx} reaches past the Fock cutoff "
            f"(truncated mass {tail:.3e} > {GUARD_TAIL_TOLERANCE:g})")


def auto_cutoff(epsilon: float, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> int:
    """Smallest N with P(Poisson(epsilon) > N) < tail_tolerance."""
    if not 0 < tail_tolerance < 1:
        raise ValueError(f"tail_tolerance must lie in (0, 1), got {tail_tolerance!r}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon!r}")
    if epsilon == 0:
        return 0
    n = int(np.floor(epsilon))
    while poisson.sf(n, epsilon) >= tail_tolerance:
        n += 1
    # walk back in case floor(epsilon) already overshoots
    while n > 0 and poisson.sf(n - 1, epsilon) < tail_tolerance:
        n -= 1
    return n


@dataclass(frozen=True)
class FockState:
    n_max: int
    blocks: tuple
    tail_mass: float

    def block_norms(self) -> np.ndarray:
        """Squared norm of every N-block, shape (n_max + 1, *batch)."""
        return np.stack([np.sum(np.abs(b) ** 2, axis=0) for b in self.blocks])

    def norm(self):
        return np.sum(self.block_norms(), axis=0)

    @property
    def batch_shape(self) -> tuple:
        return self.blocks[0].shape[1:]

    def dense(self) -> np.ndarray:
        """Amplitudes as psi[n1, n2, *batch] with zeros above the cutoff."""
        d = self.n_max + 1
        out = np.zeros((d, d) + self.batch_shape, dtype=complex)
        for total, block in enumerate(self.blocks):
            j = np.arange(total + 1)
            out[total - j, j] = block
        return out

    def truncated_mass_beyond(self, level: int):
        """Probability mass (incl. the preparation tail) above total number ``level``."""
        if level >= self.n_max:
            return self.tail_mass
        norms = self.block_norms()[max(level + 1, 0):]
        return self.tail_mass + float(np.max(np.sum(norms, axis=0)))


def _coherent_column(alpha: complex, n_max: int) -> np.ndarray:
    col = np.empty(n_max + 1, dtype=complex)
    col[0] = 1.0
    for k in range(1, n_max + 1):
        col[k] = col[k - 1] * alpha / np.sqrt(k)
    return col


def prepare_coherent(init: InitialAmplitudes, n_max: int) -> FockState:
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max!r}")
    eps = epsilon(init)
    c1 = _coherent_column(init.alpha1, n_max)
    c2 = _coherent_column(init.alpha2, n_max)
    pref = np.exp(-eps / 2.0)
    blocks = []
    for total in range(n_max + 1):
        j = np.arange(total + 1)
        blocks.append(pref * c1[total - j] * c2[j])
    tail = float(poisson.sf(n_max, eps)) if eps > 0 else 0.0
    return FockState(n_max, tuple(blocks), tail)


class BlockHamiltonian:
    """Hamiltonian restricted to total photon number N, with cached eigenbasis."""

    def __init__(self, params: CouplerParams, total: int):
        self.total = total
        self.params = params

    @cached_property
    def matrix(self) -> np.ndarray:
        p = self.params
        total = self.total
        j = np.arange(total + 1)
        n1 = total - j
        n2 = j
        diag = (p.delta / 2.0) * (n1 - n2) \
            + p.chi * (n1 * (n1 - 1) + n2 * (n2 - 1)) + p.cross_chi * n1 * n2
        # <n1-1, n2+1| kappa a2^+ a1 |n1, n2>
        off = p.kappa * np.sqrt(n1[:-1] * (n2[:-1] + 1.0))
        return np.diag(diag.astype(float)) + np.diag(off, 1) + np.diag(off, -1)

    @cached_property
    def _eig(self):
        return np.linalg.eigh(self.matrix)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eig[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eig[1]

    def propagate(self, amplitudes: np.ndarray, t) -> np.ndarray:
        """exp(-i H t) applied to a block vector; array ``t`` adds a trailing axis."""
        vals, vecs = self._eig
        coeff = vecs.T @ amplitudes
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return vecs @ (np.exp(-1j * vals * t) * coeff)
        if amplitudes.ndim != 1:
            raise ValueError("time batching needs an unbatched input block")
        phases = np.exp(-1j * np.multiply.outer(vals, t))
        return vecs @ (coeff[:, None] * phases)


def build_blocks(params: CouplerParams, n_max: int) -> list[BlockHamiltonian]:
    """Per-N blocks in the frame omega1 = +delta/2, omega2 = -delta/2."""
    return [BlockHamiltonian(params, total) for total in range(n_max + 1)]


def evolve(state: FockState, blocks, t) -> FockState:
    if len(blocks) != state.n_max + 1:
        raise ValueError(
            f"{len(blocks)} Hamiltonian blocks for a state with cutoff {state.n_max}")
    new = tuple(h.propagate(b, t) for h, b in zip(blocks, state.blocks))
    return FockState(state.n_max, new, state.tail_mass)


def _lower(psi: np.ndarray, axis: int, k: int) -> np.ndarray:
    """Apply a^k along one mode axis of a dense amplitude array."""
    if k == 0:
        return psi
    d = psi.shape[axis]
    out = np.zeros_like(psi)
    if k >= d:
        return out
    n = np.arange(d - k)
    # sqrt((n + k)! / n!)
    weights = np.sqrt(np.prod([n + i for i in range(1, k + 1)], axis=0, dtype=float))
    shape = [1] * psi.ndim
    shape[axis] = d - k
    src = [slice(None)] * psi.ndim
    dst = [slice(None)] * psi.ndim
    src[axis] = slice(k, None)
    dst[axis] = slice(0, d - k)
    out[tuple(dst)] = weights.reshape(shape) * psi[tuple(src)]
    return out


def _moment_dense(psi: np.ndarray, idx: MomentIndex):
    n1, n2, n3, n4 = idx.as_tuple()
    ket = _lower(_lower(psi, 0, n2), 1, n4)
    bra = ket if (n1, n3) == (n2, n4) else _lower(_lower(psi, 0, n1), 1, n3)
    return np.sum(np.conj(bra) * ket, axis=(0, 1))


def _check_guard(state: FockState, idx: MomentIndex):
    reach = max(idx.lowered, idx.raised)
    if reach == 0:
        return
    tail = state.truncated_mass_beyond(state.n_max - reach)
    if tail >= GUARD_TAIL_TOLERANCE:
        raise CutoffError(idx, tail)


def oracle_moment(state: FockState, idx):
    """<psi| A1^+n1 A2^+n3 A1^n2 A2^n4 |psi> by ladder operators on the basis."""
    idx = as_index(idx)
    _check_guard(state, idx)
    out = _moment_dense(state.dense(), idx)
    return complex(out) if np.ndim(out) == 0 else out


def energy(state: FockState, blocks):
    """<H> summed over blocks."""
    total = 0.0
    for h, b in zip(blocks, state.blocks):
        hb = h.matrix @ b
        total = total + np.sum(np.conj(b) * hb, axis=0)
    return np.real(total)


def total_photons(state: FockState):
    norms = state.block_norms()
    levels = np.arange(state.n_max + 1).reshape((-1,) + (1,) * (norms.ndim - 1))
    return np.sum(levels * norms, axis=0)


class FockMomentSource:
    """Moment source that runs prepare -> evolve -> ladder moments.

    ``n_max=None`` picks the Poisson cutoff for ``tail_tolerance`` plus
    head room for the highest exponent that can be requested.
    """

    backend = "fock"

    def __init__(self, params: CouplerParams, init: InitialAmplitudes, t,
                 n_max: int | None = None, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE,
                 blocks=None, headroom: int = 8):
        self.params = params
        self.init = init
        self.t = t
        if n_max is None:
            n_max = auto_cutoff(epsilon(init), tail_tolerance) + headroom
        self.n_max = n_max
        self.blocks = blocks if blocks is not None else build_blocks(params, n_max)
        self.state = evolve(prepare_coherent(init, n_max), self.blocks, t)
        self._dense = self.state.dense()
        self._cache = {}

    def normally_ordered_moment(self, idx):
        idx = as_index(idx)
        key = idx.as_tuple()
        if key not in self._cache:
            _check_guard(self.state, idx)
            out = _moment_dense(self._dense, idx)
            self._cache[key] = complex(out) if np.ndim(out) == 0 else out
        return self._cache[key]

    def mean_photon(self, mode: int):
        if mode == 1:
            idx = MomentIndex(1, 1, 0, 0)
        elif mode == 2:
            idx = MomentIndex(0, 0, 1, 1)
        else:
            raise ValueError(f"mode must be 1 or 2, got {mode!r}")
        return np.real(self.normally_ordered_moment(idx))


def oracle_moment_source(params: CouplerParams, init: InitialAmplitudes, t,
                         n_max: int | None = None,
                         tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> FockMomentSource:
    return FockMomentSource(params, init, t, n_max=n_max, tail_tolerance=tail_tolerance)
