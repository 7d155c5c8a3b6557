"""Power-law decay bounds for U(1)-symmetric lattice models.

For a correlator with ``[S_x, O_xy] = c O_xy`` and any ``kappa > 0``::

    |<O_xy>| <= C_kappa (d(x,y) + 1) ** -(kappa c - 2 kappa^2 gamma ||Phi||_kappa beta)
    C_kappa  = ||O_xy|| exp(2 kappa^2 ||Phi||_kappa)

Writing ``kappa = K / beta`` the exponent becomes
``xi_K(beta) = (K / beta) (c - 2 K gamma ||Phi||_{K/beta})``, which is
maximised over ``K``. As ``beta -> inf``, ``beta xi -> c^2 / (8 gamma ||Phi||_0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_fro

from .exceptions import DomainError, InputError
from .lattice import Graph, perimeter_constant, subset_diameter
from .models import Correlator, InteractionTerm, ModelSpec, spin_coupling_norm, symmetry_for

GOLDEN = (math.sqrt(5) - 1) / 2

SPIN_ASYMPTOTE_NOTE = (
    "spin_su2: limit reported as c^2/(8 gamma ||Phi||_0) = (32 s^2 gamma^2)^-1; "
    "the shorter form (32 s gamma^2)^-1 agrees with it only at s = 1"
)


@dataclass(frozen=True)
class DecayBound:
    c: float
    gamma: float
    beta: float
    kappa: float
    K_star: float
    xi: float
    prefactor_C: float
    knorm: float
    O_norm: float = 1.0
    vacuous: bool = False

    def value(self, d) -> float:
        """``C (d + 1) ** -xi``; at ``d = 0`` this is just ``C``."""
        return bound_value(self.prefactor_C, self.xi, d)


@dataclass(frozen=True)
class RotationAngles:
    x: int
    y: int
    kappa: float
    theta: np.ndarray

    def __getitem__(self, z):
        return float(self.theta[z])


@dataclass
class RotationDecomposition:
    """``R^-1 H R = H + B + C`` for one (model, x, y, kappa) instance, plus checks."""

    H: object
    B: object
    C: object
    norm_C: float
    norm_C_bound: float
    checks: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


# ------------------------------------------------------------------ norms


def k_norm(terms: Iterable[InteractionTerm], g: Graph, K: float) -> float:
    """``sup_y sum_{A ni y} ||Phi_A|| (|A|-1)^2 (diam A + 1)^(2K(|A|-1) + 2)``."""
    if K < 0:
        raise InputError(f"K must be nonnegative, got {K}")
    per_site = np.zeros(g.n_vertices)
    for term in terms:
        n = term.size
        if n == 1 or term.norm_value == 0:
            continue
        diam = subset_diameter(g, term.support)
        weight = term.norm_value * (n - 1) ** 2 * (diam + 1.0) ** (2 * K * (n - 1) + 2)
        for y in term.support:
            per_site[y] += weight
    return float(per_site.max(initial=0.0))


def zeta_sum(p: float, n_direct: int = 64) -> float:
    """``sum_{r >= 1} r^-p`` for ``p > 1``.

    Direct summation of the first ``n_direct - 1`` terms plus an
    Euler-Maclaurin tail: the integral from ``N``, half the ``N``-th term and
    two derivative corrections. The neglected remainder is below
    ``p(p+1)...(p+4) N^-(p+5) / 30240``, far under 1e-12 relative.
    """
    if not p > 1:
        raise DomainError(f"sum of r^-p diverges for p = {p} <= 1")
    N = n_direct
    r = np.arange(1, N, dtype=float)
    head = float(np.sum(r ** -p))
    tail = N ** (1 - p) / (p - 1) + 0.5 * N ** -p + p * N ** (-p - 1) / 12
    tail -= p * (p + 1) * (p + 2) * N ** (-p - 3) / 720
    return head + tail


def family_knorm(spec: ModelSpec, gamma=None) -> Callable[[float], float]:
    """Closed-form upper bound ``kappa -> ||Phi||_kappa`` on any graph with the given gamma.

    spin_su2  2^(2k+2) gamma max_e sum_k |c_k| (3 s^2)^k
    loop_tq   2^(2k+2) gamma (u + (1 - u) theta + 1)
    hubbard   2 |t| gamma sum_r r^-(alpha - 2k - 3)      (needs alpha > 2k + 4)
    tj        2^(2k+2) gamma (2 |t| + |J|)
    """
    gamma = float(spec.perimeter() if gamma is None else gamma)
    fam = spec.family
    if fam == "spin_su2":
        if spec.graph is not None:
            edges = spec.graph.edges
            per_edge = max((spin_coupling_norm(spec.edge_couplings(e), spec.s) for e in edges), default=0.0)
        else:
            per_edge = spin_coupling_norm(spec.edge_couplings((0, 1)), spec.s)
    elif fam == "loop_tq":
        per_edge = spec.u + (1 - spec.u) * spec.theta + 1
    elif fam == "tj":
        per_edge = 2 * abs(spec.t) + abs(spec.J)
    else:
        t, alpha = abs(spec.t), spec.alpha

        def hubbard(kappa):
            p = alpha - 2 * kappa - 3
            if not p > 1:
                raise DomainError(f"hubbard K-norm diverges: alpha = {alpha} <= 2 kappa + 4 = {2 * kappa + 4}")
            return 2 * t * gamma * zeta_sum(p)

        return hubbard

    def pair(kappa):
        return 2 ** (2 * kappa + 2) * gamma * per_edge

    return pair


def lattice_knorm(terms, g: Graph) -> Callable[[float], float]:
    terms = list(terms)
    return lambda kappa: k_norm(terms, g, kappa)


# ------------------------------------------------------------ exponents


def rotation_angles(g: Graph, x: int, y: int, kappa: float) -> RotationAngles:
    """``theta_z = kappa log((d(x,y) + 1) / (d(x,z) + 1))`` inside the ball of radius d(x,y), else 0."""
    if x == y:
        raise InputError("rotation angles need x != y")
    dxy = g.distance(x, y)
    if dxy is None:
        raise InputError(f"vertices {x} and {y} are not connected")
    row = g.distances[x]
    theta = np.zeros(g.n_vertices)
    inside = (row >= 0) & (row <= dxy)
    theta[inside] = kappa * np.log((dxy + 1.0) / (row[inside] + 1.0))
    return RotationAngles(x, y, float(kappa), theta)


def xi_of_K(beta: float, K: float, c: float, gamma, knorm_fn: Callable[[float], float]) -> float:
    """``(K / beta) (c - 2 K gamma ||Phi||_{K/beta})``; may be negative."""
    if not beta > 0 or not K > 0:
        raise InputError(f"beta and K must be positive, got beta={beta}, K={K}")
    return (K / beta) * (c - 2 * K * float(gamma) * knorm_fn(K / beta))


def bound_value(C: float, xi: float, d) -> float:
    return float(C * (np.asarray(d, dtype=float) + 1.0) ** (-xi))


def optimize_xi(beta: float, c: float, gamma, knorm_fn, K_max: float | None = None,
                O_norm: float = 1.0, rtol: float = 1e-9) -> DecayBound:
    """Maximise ``xi_K(beta)`` over ``K in (0, K_max]`` by golden-section search.

    ``K_max`` defaults to ``10 c / (4 gamma ||Phi||_0)``, ten times the
    large-beta optimum. K values where the norm diverges count as ``-inf``.
    A bound with ``xi <= 0`` is returned with ``vacuous=True``.
    """
    if not beta > 0:
        raise InputError(f"beta must be positive, got {beta}")
    gamma = float(gamma)
    if c <= 0:
        return DecayBound(c, gamma, beta, 0.0, 0.0, 0.0, O_norm, knorm_fn(0.0), O_norm, vacuous=True)
    if K_max is None:
        norm0 = knorm_fn(0.0)
        if norm0 <= 0:
            raise DomainError("interaction has zero K-norm; the exponent is unbounded")
        K_max = 10 * c / (4 * gamma * norm0)

    def f(K):
        try:
            return xi_of_K(beta, K, c, gamma, knorm_fn)
        except DomainError:
            return -math.inf

    a, b = 0.0, float(K_max)
    x1, x2 = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(400):
        if b - a <= rtol * max(x1, x2):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
    K_star, xi = (x1, f1) if f1 >= f2 else (x2, f2)
    if f(b) > xi:
        K_star, xi = b, f(b)
    kappa = K_star / beta
    knorm = knorm_fn(kappa)
    C = O_norm * math.exp(2 * kappa**2 * knorm)
    return DecayBound(c, gamma, beta, kappa, K_star, xi, C, knorm, O_norm, vacuous=not xi > 0)


def model_bound(spec: ModelSpec, beta: float, correlator=None, gamma=None, **kwargs) -> DecayBound:
    """Optimised bound using the family's closed-form K-norm."""
    sym = symmetry_for(spec, correlator)
    gamma = spec.perimeter() if gamma is None else gamma
    if spec.family == "hubbard" and not spec.alpha > 4:
        raise DomainError(f"hubbard bound needs alpha > 4, got {spec.alpha}")
    return optimize_xi(beta, sym.c, gamma, family_knorm(spec, gamma), **kwargs)


def asymptotic_exponent(spec: ModelSpec, correlator=None, gamma=None) -> float:
    """``lim beta xi(beta) = c^2 / (8 gamma ||Phi||_0)`` with the family K-norm bound.

    Defaults to the correlator with the smallest ``c`` for the family, which
    gives the constants 1/(8 g^2 (theta-1)^2 (u+(1-u)theta+1)) for loops,
    1/(64 g^2 |t| sum r^(3-alpha)) for Hubbard and 1/(128 g^2 (2|t|+|J|)) for t-J.
    """
    if spec.family == "hubbard" and not spec.alpha > 4:
        raise DomainError(f"hubbard asymptote needs alpha > 4, got {spec.alpha}")
    if spec.family == "loop_tq":
        spec.validate()
    sym = symmetry_for(spec, correlator)
    gamma = float(spec.perimeter() if gamma is None else gamma)
    norm0 = family_knorm(spec, gamma)(0.0)
    if norm0 <= 0:
        raise DomainError("interaction has zero K-norm; the exponent is unbounded")
    return sym.c**2 / (8 * gamma * norm0)


def bound_curve(bound: DecayBound, d_values) -> list[tuple[int, float]]:
    return [(int(d), bound.value(d)) for d in d_values]


def decay_log_bound(kappa: float, c: float, gamma, knorm: float, beta: float, O_norm: float, d: int) -> float:
    """Natural log of the right-hand side of the decay inequality at fixed kappa."""
    exponent = kappa * c - 2 * kappa**2 * float(gamma) * knorm * beta
    return math.log(O_norm) + 2 * kappa**2 * knorm - exponent * math.log(d + 1)


# ------------------------------------------------------ rotation machinery


def _is_diagonal(M) -> bool:
    M = sp.csr_matrix(M)
    coo = M.tocoo()
    return bool(np.all(coo.row == coo.col))


class _Conjugator:
    """``M -> exp(-G) M exp(G)`` for a hermitian ``G`` (diagonal fast path)."""

    def __init__(self, G):
        if sp.issparse(G) and _is_diagonal(G):
            self.diag = np.real(G.diagonal())
            self.vecs = None
        else:
            G = G.toarray() if sp.issparse(G) else np.asarray(G)
            vals, self.vecs = np.linalg.eigh(G)
            self.diag = vals

    def __call__(self, M, sign=1):
        g = sign * self.diag
        if self.vecs is None:
            left = sp.diags(np.exp(-g))
            right = sp.diags(np.exp(g))
            return (left @ sp.csr_matrix(M) @ right).tocsr()
        V = self.vecs
        Md = M.toarray() if sp.issparse(M) else np.asarray(M)
        inner = V.conj().T @ Md @ V
        inner = np.exp(-g)[:, None] * inner * np.exp(g)[None, :]
        return V @ inner @ V.conj().T


def _fro(M) -> float:
    if sp.issparse(M):
        return float(sparse_fro(M)) if M.nnz else 0.0
    return float(np.linalg.norm(M))


def verify_rotation_machinery(spec: ModelSpec, x: int, y: int, kappa: float, correlator=None,
                              beta: float = 1.0, tol: float = 1e-9, trotter_n: int = 8) -> RotationDecomposition:
    """Check the complex-rotation identities on a realised model.

    Builds ``R = prod_z exp(theta_z S_z)`` and verifies

    * ``R^-1 O_xy R = exp(-c theta_x) O_xy``;
    * ``R^-1 H R = H + B + C`` with ``B`` (odd part, assembled term by term
      from ``T_A``) anti-hermitian and ``C`` (even part) hermitian;
    * ``||C|| <= 2 kappa^2 gamma ||Phi||_kappa log(d+1) + 2 kappa^2 ||Phi||_kappa``;
    * ``||exp(-(beta/n) B)|| = 1``;
    * ``|<O_xy>| <= exp(-c theta_x) ||O_xy|| exp(beta ||C||)``.

    Frobenius norms are used for the identity residuals (an upper bound on
    the operator norm).
    """
    from scipy.linalg import expm

    from .ed import ModelOperators, Spectrum, spectral_norm

    if kappa < 0:
        raise InputError("kappa must be nonnegative")
    ops = ModelOperators(spec)
    g = spec.graph
    sym = symmetry_for(spec, correlator)
    if kappa == 0:
        theta = np.zeros(g.n_vertices)
        dxy = g.distance(x, y)
    else:
        theta = rotation_angles(g, x, y, kappa).theta
        dxy = g.distance(x, y)
    gens = [ops.generator(sym, z) for z in g.vertices]

    G = sum((theta[z] * gens[z] for z in g.vertices if theta[z] != 0), sp.csr_matrix((ops.dim, ops.dim)))
    rot = _Conjugator(G)
    H = ops.hamiltonian_sparse
    O = ops.correlator(sym.correlator_tag, x, y)

    res = {}
    rotated_O = rot(O)
    res["rotO"] = _fro(rotated_O - math.exp(-sym.c * theta[x]) * O)

    B = sp.csr_matrix((ops.dim, ops.dim), dtype=complex)
    C = sp.csr_matrix((ops.dim, ops.dim), dtype=complex)
    for term, Phi in zip(ops.terms, ops.term_matrices):
        support = sorted(term.support)
        x0 = min(support, key=lambda z: (g.distances[x, z] if g.distances[x, z] >= 0 else 10**9, z))
        coeffs = {z: theta[z] - theta[x0] for z in support if theta[z] != theta[x0]}
        if not coeffs:
            continue
        T_A = sum(a * gens[z] for z, a in coeffs.items())
        conj = _Conjugator(T_A)
        fwd, bwd = conj(Phi, 1), conj(Phi, -1)
        B = B + sp.csr_matrix((fwd - bwd) / 2)
        C = C + sp.csr_matrix((fwd + bwd) / 2 - Phi)
    rotated_H = rot(H)
    res["rot1"] = _fro(sp.csr_matrix(rotated_H) - H - B - C)
    res["B_antihermitian"] = _fro(B + B.conj().T)
    res["C_hermitian"] = _fro(C - C.conj().T)

    gamma = float(perimeter_constant(g))
    knorm = k_norm(ops.terms, g, kappa)
    norm_C = spectral_norm(C)
    bound_C = 2 * kappa**2 * gamma * knorm * math.log(dxy + 1) + 2 * kappa**2 * knorm

    step = expm(-(beta / trotter_n) * B.toarray()) if ops.dim <= 1024 else None
    res["expB_unitary"] = abs(spectral_norm(step) - 1) if step is not None else 0.0

    spectrum = Spectrum(H)
    expectation = abs(spectrum.gibbs(beta).expect(O))
    O_norm = spectral_norm(O)
    trace_bound = math.exp(-sym.c * theta[x]) * O_norm * math.exp(beta * norm_C)

    checks = {
        "rotO": res["rotO"] <= tol,
        "rot1": res["rot1"] <= tol,
        "B_antihermitian": res["B_antihermitian"] <= tol,
        "C_hermitian": res["C_hermitian"] <= tol,
        "C_norm_bound": norm_C <= bound_C + tol,
        "expB_unitary": res["expB_unitary"] <= tol,
        "trace_bound": expectation <= trace_bound * (1 + 1e-12) + 1e-15,
    }
    res["expectation"] = expectation
    res["trace_bound"] = trace_bound
    return RotationDecomposition(H, B, C, norm_C, bound_C, checks, res)
