"""Exact diagonalization of the four model families on small graphs.

Operators are assembled as ``scipy.sparse`` matrices on the tensor-product
basis (vertex 0 is the leftmost Kronecker factor) and densified only for
diagonalization. Fermionic families use two modes per site, mode ``2x``
for spin up and ``2x + 1`` for spin down, with the Jordan-Wigner string
running over lower mode indices; the local basis of a site is therefore
``|n_up n_dn> = 00, 01, 10, 11``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import InputError, NumericError, ResourceError
from .lattice import Graph
from .models import Correlator, InteractionTerm, ModelSpec, SymmetryData, build_interaction, symmetry_for

DEFAULT_MAX_DIM = 2**14
MAX_DIM_ENV = "DECAYBOUND_MAX_DIM"


def max_dim() -> int:
    value = os.environ.get(MAX_DIM_ENV)
    if value is None:
        return DEFAULT_MAX_DIM
    try:
        return int(value)
    except ValueError:
        raise InputError(f"{MAX_DIM_ENV} must be an integer, got {value!r}") from None


# ------------------------------------------------------------------ algebra


@dataclass(frozen=True)
class SpinAlgebra:
    """Spin-s matrices in the basis ``m = s, s-1, ..., -s``."""

    s: Fraction
    S1: np.ndarray
    S2: np.ndarray
    S3: np.ndarray
    Splus: np.ndarray
    Sminus: np.ndarray

    @property
    def dim(self) -> int:
        return self.S3.shape[0]


def spin_matrices(s) -> SpinAlgebra:
    s = Fraction(s).limit_denominator(2)
    if s <= 0 or (2 * s).denominator != 1:
        raise InputError(f"spin must be a positive half-integer, got {s}")
    dim = int(2 * s + 1)
    m = float(s) - np.arange(dim)
    splus = np.zeros((dim, dim))
    for i in range(1, dim):
        splus[i - 1, i] = np.sqrt(float(s) * (float(s) + 1) - m[i] * (m[i] + 1))
    sminus = splus.T.copy()
    return SpinAlgebra(
        s=s,
        S1=(splus + sminus) / 2,
        S2=(splus - sminus) / 2j,
        S3=np.diag(m),
        Splus=splus,
        Sminus=sminus,
    )


def transposition(theta: int) -> np.ndarray:
    """``T e_i (x) e_j = e_j (x) e_i`` on C^theta (x) C^theta."""
    T = np.zeros((theta * theta, theta * theta))
    for i in range(theta):
        for j in range(theta):
            T[j * theta + i, i * theta + j] = 1.0
    return T


def double_bar(theta: int) -> np.ndarray:
    """``(e_i (x) e_j, Q e_l (x) e_k) = delta_ij delta_lk``; ``||Q|| = theta``."""
    v = np.zeros(theta * theta)
    v[[i * theta + i for i in range(theta)]] = 1.0
    return np.outer(v, v)


class HilbertSpace:
    """Tensor product of per-site spaces with a dimension cap."""

    def __init__(self, site_dims, cap: int | None = None):
        self.site_dims = tuple(int(d) for d in site_dims)
        self.total_dim = int(np.prod(self.site_dims, dtype=object)) if self.site_dims else 1
        self.cap = max_dim() if cap is None else cap
        if self.total_dim > self.cap:
            raise ResourceError(
                f"Hilbert space dimension {self.total_dim} exceeds cap {self.cap} "
                f"(raise it with {MAX_DIM_ENV})"
            )

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    def identity(self):
        return sp.identity(self.total_dim, format="csr")

    def embed(self, op, site: int):
        """``op`` acting on ``site``, identity elsewhere."""
        left = int(np.prod(self.site_dims[:site], dtype=np.int64))
        right = int(np.prod(self.site_dims[site + 1:], dtype=np.int64))
        out = sp.kron(sp.identity(left), sp.csr_matrix(op))
        return sp.kron(out, sp.identity(right), format="csr")

    def embed_pair(self, op2, x: int, y: int):
        """A two-site operator given on ``C^dx (x) C^dy`` placed on sites ``x, y``."""
        dx, dy = self.site_dims[x], self.site_dims[y]
        op2 = np.asarray(op2).reshape(dx, dy, dx, dy)
        out = None
        for a in range(dx):
            for b in range(dx):
                block = op2[a, :, b, :]
                if not np.any(block):
                    continue
                unit = np.zeros((dx, dx))
                unit[a, b] = 1.0
                piece = self.embed(unit, x) @ self.embed(block, y)
                out = piece if out is None else out + piece
        return out if out is not None else sp.csr_matrix((self.total_dim, self.total_dim))


class FermionOps:
    """Jordan-Wigner annihilation operators ``c[sigma][x]`` (sigma 0 = up, 1 = down)."""

    def __init__(self, n_sites: int, cap: int | None = None):
        self.space = HilbertSpace([4] * n_sites, cap)
        self.n_sites = n_sites
        n_modes = 2 * n_sites
        a = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
        z = sp.diags([1.0, -1.0])
        eye = sp.identity(2)
        self.c = [[None] * n_sites for _ in range(2)]
        for mode in range(n_modes):
            factors = [z] * mode + [a] + [eye] * (n_modes - mode - 1)
            op = factors[0]
            for f in factors[1:]:
                op = sp.kron(op, f, format="csr")
            self.c[mode % 2][mode // 2] = sp.csr_matrix(op)

    def cdag(self, sigma, x):
        return self.c[sigma][x].T.tocsr()

    def n(self, sigma, x):
        return (self.cdag(sigma, x) @ self.c[sigma][x]).tocsr()

    def n_total(self, x):
        return self.n(0, x) + self.n(1, x)

    def hop(self, x, y):
        """``sum_sigma c+_{sigma x} c_{sigma y} + h.c.``"""
        out = None
        for sigma in (0, 1):
            h = self.cdag(sigma, x) @ self.c[sigma][y]
            h = h + h.T
            out = h if out is None else out + h
        return out.tocsr()

    def splus(self, x):
        return (self.cdag(0, x) @ self.c[1][x]).tocsr()

    def spin_dot(self, x, y):
        """``S_x . S_y`` with ``S = c+ (Pauli / 2) c``."""
        s3x = (self.n(0, x) - self.n(1, x)) / 2
        s3y = (self.n(0, y) - self.n(1, y)) / 2
        sp_x, sp_y = self.splus(x), self.splus(y)
        return (s3x @ s3y + (sp_x @ sp_y.T + sp_x.T @ sp_y) / 2).tocsr()


# ------------------------------------------------------------- realisation


def _space_for(spec: ModelSpec) -> HilbertSpace:
    if spec.graph is None:
        raise InputError("exact diagonalization needs a graph")
    return HilbertSpace([spec.local_dim] * spec.graph.n_vertices)


class ModelOperators:
    """Sparse realisation of a :class:`ModelSpec`: terms, generators, correlators."""

    def __init__(self, spec: ModelSpec):
        spec.validate()
        self.spec = spec
        self.graph: Graph = spec.graph
        if spec.family in ("hubbard", "tj"):
            self.fermions = FermionOps(self.graph.n_vertices)
            self.space = self.fermions.space
        else:
            self.fermions = None
            self.space = _space_for(spec)
            spin = spec.s if spec.family == "spin_su2" else spec.loop_spin
            self.spin = spin_matrices(spin)

    @property
    def dim(self) -> int:
        return self.space.total_dim

    # spin-type families
    def spin_op(self, component: str, x: int):
        return self.space.embed(getattr(self.spin, component), x)

    def _spin_dot(self, x, y):
        S = self.spin
        two = sum(np.kron(A, A) for A in (S.S1, S.S2, S.S3))
        return self.space.embed_pair(np.real_if_close(two), x, y)

    def term_matrix(self, term: InteractionTerm):
        spec = self.spec
        kind, where = term.matrix_tag
        if kind == "spin":
            x, y = where
            dot = self._spin_dot(x, y)
            out = sp.csr_matrix((self.dim, self.dim))
            power = self.space.identity()
            for c in spec.edge_couplings(where):
                power = (power @ dot).tocsr()
                out = out - c * power
            return out.tocsr()
        if kind == "loop":
            x, y = where
            theta = int(spec.theta)
            local = spec.u * transposition(theta) + (1 - spec.u) * double_bar(theta) - np.eye(theta * theta)
            return -self.space.embed_pair(local, x, y)
        f = self.fermions
        if kind == "hop":
            x, y = where
            t_xy = spec.t * (self.graph.distance(x, y) + 1) ** (-spec.alpha)
            return (-t_xy * f.hop(x, y)).tocsr()
        if kind == "onsite":
            x = where
            return (spec.U * f.n(0, x) @ f.n(1, x) - spec.mu * f.n_total(x)).tocsr()
        if kind == "tj":
            x, y = where
            hop = -spec.t / 2 * f.hop(x, y)
            exch = spec.J * (f.spin_dot(x, y) - f.n_total(x) @ f.n_total(y) / 4)
            return (hop + exch).tocsr()
        raise InputError(f"cannot realise term tagged {term.matrix_tag!r}")

    @cached_property
    def terms(self) -> list[InteractionTerm]:
        return build_interaction(self.spec)

    @cached_property
    def term_matrices(self) -> list:
        return [self.term_matrix(term) for term in self.terms]

    @cached_property
    def hamiltonian_sparse(self):
        H = sp.csr_matrix((self.dim, self.dim))
        for M in self.term_matrices:
            H = H + M
        H = H.tocsr()
        if H.dtype.kind == "c" and abs(H.imag).max(initial=0) < 1e-14:
            H = H.real.tocsr()
        return H

    def hamiltonian(self) -> np.ndarray:
        return self.hamiltonian_sparse.toarray()

    def generator(self, symmetry: SymmetryData, x: int):
        """The norm-one local generator ``S_x`` of the U(1) symmetry."""
        tag = symmetry.generator_tag
        if tag == "S3/s":
            return self.spin_op("S3", x) / float(self.spin.s)
        if tag == "S2/s":
            return self.spin_op("S2", x) / float(self.spin.s)
        f = self.fermions
        if tag == "n_up-n_dn":
            return (f.n(0, x) - f.n(1, x)).tocsr()
        if tag == "(n_up+n_dn)/2":
            return (f.n_total(x) / 2).tocsr()
        raise InputError(f"unknown generator {tag!r}")

    def correlator(self, correlator: Correlator | str, x: int, y: int):
        correlator = Correlator(correlator)
        symmetry_for(self.spec, correlator)  # family check
        if correlator is Correlator.SPIN_FLIP:
            return (self.spin_op("Splus", x) @ self.spin_op("Sminus", y)).tocsr()
        if correlator is Correlator.LOOP_FLIP:
            S = self.spin
            q_minus_x = self.space.embed(S.S1 - 1j * S.S3, x)
            q_plus_y = self.space.embed(S.S1 + 1j * S.S3, y)
            return (q_minus_x @ q_plus_y).tocsr()
        f = self.fermions
        if correlator is Correlator.MAGNETIC:
            return (f.splus(x) @ f.splus(y).T).tocsr()
        if correlator is Correlator.PAIR:
            return (f.cdag(0, x) @ f.cdag(1, x) @ f.c[0][y] @ f.c[1][y]).tocsr()
        return (f.cdag(0, x) @ f.c[0][y]).tocsr()


def term_matrix(spec: ModelSpec, term: InteractionTerm):
    return ModelOperators(spec).term_matrix(term)


def spectral_norm(M, tol: float = 1e-12) -> float:
    """Largest singular value."""
    if sp.issparse(M):
        if M.nnz == 0:
            return 0.0
        if M.shape[0] > 512:
            gram = (M.conj().T @ M).tocsr()
            val = spla.eigsh(gram, k=1, which="LA", tol=tol, return_eigenvectors=False)[0]
            return float(np.sqrt(max(val, 0.0)))
        M = M.toarray()
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


# ------------------------------------------------------------ builders


def _require_cap(n_sites: int, local_dim: int):
    HilbertSpace([local_dim] * n_sites)


def build_spin_hamiltonian(g: Graph, s, couplings) -> np.ndarray:
    """``-sum_edges sum_k c_k (S_x . S_y)^k`` as a dense matrix."""
    spec = ModelSpec("spin_su2", graph=g, s=s, couplings=couplings)
    _require_cap(g.n_vertices, spec.local_dim)
    return ModelOperators(spec).hamiltonian()


def build_loop_hamiltonian(g: Graph, theta: int, u: float) -> np.ndarray:
    """``-sum_edges (u T_xy + (1 - u) Q_xy - 1)`` on ``(C^theta)^{(x) n}``."""
    spec = ModelSpec("loop_tq", graph=g, theta=theta, u=u)
    _require_cap(g.n_vertices, int(theta))
    return ModelOperators(spec).hamiltonian()


def build_hubbard(g: Graph, t: float, alpha: float, U: float = 0.0, mu: float = 0.0) -> np.ndarray:
    spec = ModelSpec("hubbard", graph=g, t=t, alpha=alpha, U=U, mu=mu)
    _require_cap(g.n_vertices, 4)
    return ModelOperators(spec).hamiltonian()


def build_tj(g: Graph, t: float, J: float) -> np.ndarray:
    spec = ModelSpec("tj", graph=g, t=t, J=J)
    _require_cap(g.n_vertices, 4)
    return ModelOperators(spec).hamiltonian()


# ---------------------------------------------------------------- Gibbs


class Spectrum:
    """Cached eigendecomposition of a hermitian matrix."""

    def __init__(self, H, herm_tol: float = 1e-10):
        H = H.toarray() if sp.issparse(H) else np.asarray(H)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise InputError(f"Hamiltonian must be square, got shape {H.shape}")
        asym = np.abs(H - H.conj().T).max(initial=0.0)
        if asym > herm_tol:
            raise InputError(f"Hamiltonian is not hermitian (max |H - H^+| = {asym:.3g})")
        self.energies, self.vectors = np.linalg.eigh(H)

    @property
    def dim(self) -> int:
        return len(self.energies)

    def gap(self, degeneracy_tol: float = 1e-9) -> float:
        """Distance from the ground level to the next distinct level (inf if none)."""
        above = self.energies[self.energies > self.energies[0] + degeneracy_tol]
        return float(above[0] - self.energies[0]) if above.size else float("inf")

    def ground_state_beta(self, factor: float = 50.0) -> float:
        gap = self.gap()
        return factor / gap if np.isfinite(gap) else factor

    def log_partition(self, beta: float) -> float:
        e0 = self.energies[0]
        return float(-beta * e0 + np.log(np.sum(np.exp(-beta * (self.energies - e0)))))

    def partition_function(self, beta: float) -> float:
        return float(np.exp(self.log_partition(beta)))

    def gibbs(self, beta: float) -> "GibbsState":
        return GibbsState(self, beta)

    def diagonal(self, O) -> np.ndarray:
        """``<v_j| O |v_j>`` for every eigenvector; reuse across temperatures."""
        V = self.vectors
        return np.einsum("ij,ij->j", V.conj(), O @ V)

    def thermal_average(self, diag: np.ndarray, beta: float) -> complex:
        w = np.exp(-beta * (self.energies - self.energies[0]))
        return complex(np.dot(w, diag) / w.sum())


class GibbsState:
    """``<a> = Tr a e^{-beta H} / Tr e^{-beta H}`` via the eigenbasis of ``H``."""

    def __init__(self, spectrum: Spectrum, beta: float, cutoff: float = 1e-18):
        if beta < 0:
            raise InputError(f"beta must be nonnegative, got {beta}")
        self.spectrum = spectrum
        self.beta = float(beta)
        shifted = -self.beta * (spectrum.energies - spectrum.energies[0])
        w = np.exp(shifted)
        w /= w.sum()
        self.weights = w
        keep = np.flatnonzero(w > cutoff * w.max())
        if len(keep) == len(w):
            self._V, self._w = spectrum.vectors, w
        else:
            self._V, self._w = spectrum.vectors[:, keep], w[keep]

    def expect(self, O) -> complex:
        V, w = self._V, self._w
        OV = O @ V
        diag = np.einsum("ij,ij->j", V.conj(), OV)
        value = complex(np.dot(w, diag))
        if not np.isfinite(value):
            raise NumericError("non-finite Gibbs expectation")
        return value


def gibbs_correlator(ctx: GibbsState, O) -> complex:
    if O.shape != (ctx.spectrum.dim, ctx.spectrum.dim):
        raise InputError(f"operator shape {O.shape} does not match Hilbert dimension {ctx.spectrum.dim}")
    return ctx.expect(O)


def standard_correlators(spec: ModelSpec, x: int, y: int, beta: float, ops: ModelOperators | None = None,
                         spectrum: Spectrum | None = None) -> dict[str, complex]:
    """Gibbs two-point functions for the pair ``(x, y)``.

    Spin and loop families: ``S1S1, S2S2, S3S3, S+S-`` (plus ``Q-Q+`` for
    loops). Fermionic families: ``magnetic, pair, single_particle``.
    """
    ops = ops or ModelOperators(spec)
    spectrum = spectrum or Spectrum(ops.hamiltonian_sparse)
    state = spectrum.gibbs(beta)
    out = {}
    if spec.family in ("spin_su2", "loop_tq"):
        for name in ("S1", "S2", "S3"):
            out[f"{name}{name}"] = state.expect(ops.spin_op(name, x) @ ops.spin_op(name, y))
        out["S+S-"] = state.expect(ops.spin_op("Splus", x) @ ops.spin_op("Sminus", y))
        if spec.family == "loop_tq":
            out["Q-Q+"] = state.expect(ops.correlator(Correlator.LOOP_FLIP, x, y))
    else:
        for corr in (Correlator.MAGNETIC, Correlator.PAIR, Correlator.SINGLE_PARTICLE):
            out[corr.value] = state.expect(ops.correlator(corr, x, y))
    return out
