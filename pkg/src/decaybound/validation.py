"""Cross-validation suites over a built-in manifest of desk-scale instances.

Each suite returns a :class:`SuiteReport`, a flat list of named checks with
the measured value, the limit it was held to and a status. Instances whose
Hilbert space exceeds the dimension cap are reported as skipped.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm

from . import ed, loops
from .bounds import k_norm, decay_log_bound, verify_rotation_machinery
from .exceptions import InputError
from .lattice import Graph, make_lattice, perimeter_constant
from .models import FAMILY_CORRELATORS, ModelSpec, symmetry_for

SUITES = ("symmetry", "rotation", "correspondence", "inequality")
DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class CheckResult:
    suite: str
    instance: str
    check: str
    value: float
    limit: float
    status: str  # "pass", "fail" or "skip"
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"


@dataclass
class SuiteReport:
    suite: str
    results: list[CheckResult] = field(default_factory=list)

    def add(self, instance, check, value, limit, passed, note=""):
        status = "pass" if passed else "fail"
        self.results.append(CheckResult(self.suite, instance, check, float(value), float(limit), status, note))

    def skip(self, instance, note):
        self.results.append(CheckResult(self.suite, instance, "*", math.nan, math.nan, "skip", note))

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def n_failed(self) -> int:
        return sum(r.status == "fail" for r in self.results)

    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if r.status == "fail"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "instance", "check", "value", "limit", "status", "note"])
        for r in self.results:
            w.writerow([r.suite, r.instance, r.check, f"{r.value:.6e}", f"{r.limit:.6e}", r.status, r.note])
        return buf.getvalue()


# ------------------------------------------------------------------ manifest


def _spin(g, s=Fraction(1, 2), couplings=(1.0,)):
    return ModelSpec("spin_su2", graph=g, s=s, couplings=couplings)


def symmetry_instances():
    sq22 = make_lattice("square", (2, 2))
    return [
        ("spin_half_square2x2", _spin(sq22)),
        ("spin_one_chain4", _spin(make_lattice("chain", 4), s=1, couplings=(0.1, 0.05))),
        ("spin_half_triangular3x2", _spin(make_lattice("triangular", (3, 2)), couplings=(-1.0,))),
        ("loop_theta3_square2x2", ModelSpec("loop_tq", graph=sq22, theta=3, u=0.5)),
        ("loop_theta2_chain5", ModelSpec("loop_tq", graph=make_lattice("chain", 5), theta=2, u=0.0)),
        ("hubbard_chain4", ModelSpec("hubbard", graph=make_lattice("chain", 4), t=1.0, alpha=5.0, U=2.0, mu=0.3)),
        ("hubbard_square2x2", ModelSpec("hubbard", graph=sq22, t=0.7, alpha=4.5, U=-1.0)),
        ("tj_chain4", ModelSpec("tj", graph=make_lattice("chain", 4), t=1.0, J=0.5)),
        ("tj_square2x2", ModelSpec("tj", graph=sq22, t=0.5, J=1.0)),
    ]


def rotation_instances():
    return [
        ("spin_half_chain8", _spin(make_lattice("chain", 8)), [(0, 7), (0, 1), (2, 5)]),
        ("spin_half_square2x3", _spin(make_lattice("square", (2, 3))), [(0, 5), (0, 1), (1, 4)]),
    ]


def inequality_instances():
    sq22 = make_lattice("square", (2, 2))
    return [
        ("spin_half_chain10", _spin(make_lattice("chain", 10))),
        ("spin_half_ring8", _spin(make_lattice("ring", 8), couplings=(-1.0,))),
        ("spin_half_square4x3", _spin(make_lattice("square", (4, 3)))),
        ("spin_one_chain5", _spin(make_lattice("chain", 5), s=1, couplings=(0.2, 0.04))),
        ("loop_theta3_square2x2", ModelSpec("loop_tq", graph=sq22, theta=3, u=0.5)),
        ("hubbard_chain4", ModelSpec("hubbard", graph=make_lattice("chain", 4), t=1.0, alpha=5.0, U=2.0)),
        ("hubbard_square2x2", ModelSpec("hubbard", graph=sq22, t=1.0, alpha=5.0, U=4.0, mu=1.0)),
        ("hubbard_chain5", ModelSpec("hubbard", graph=make_lattice("chain", 5), t=1.0, alpha=6.0, U=1.0)),
        ("tj_chain4", ModelSpec("tj", graph=make_lattice("chain", 4), t=1.0, J=0.5)),
        ("tj_square2x2", ModelSpec("tj", graph=sq22, t=1.0, J=1.0)),
        ("tj_chain5", ModelSpec("tj", graph=make_lattice("chain", 5), t=1.0, J=0.3)),
    ]


CORRESPONDENCE_GRID = [(theta, u, beta) for theta in (2, 3) for u in (0.0, 0.5, 1.0) for beta in (0.5, 1.0)]


def fro_norm(M) -> float:
    return float(sparse_norm(M)) if sp.issparse(M) else float(np.linalg.norm(M))


def _fits(spec: ModelSpec) -> bool:
    return spec.local_dim ** spec.graph.n_vertices <= ed.max_dim()


def _ordered_pairs(g: Graph):
    return [(x, y) for x in g.vertices for y in g.vertices if x != y and g.distance(x, y) is not None]


# -------------------------------------------------------------------- suites


def run_symmetry(tol: float = 1e-10, instances=None) -> SuiteReport:
    """Commutator identities and SU(2) correlator identities on small instances."""
    report = SuiteReport("symmetry")
    for name, spec in instances or symmetry_instances():
        if not _fits(spec):
            report.skip(name, "dimension cap exceeded")
            continue
        ops = ed.ModelOperators(spec)
        g = spec.graph
        H = ops.hamiltonian_sparse
        for corr in FAMILY_CORRELATORS[spec.family]:
            sym = symmetry_for(spec, corr)
            gens = [ops.generator(sym, z) for z in g.vertices]
            total = sum(gens[1:], gens[0])
            comm = fro_norm(H @ total - total @ H)
            report.add(name, f"[H,sum S]:{corr.value}", comm, tol, comm < tol)
            worst_xy, worst_z = 0.0, 0.0
            for x, y in _ordered_pairs(g):
                O = ops.correlator(corr, x, y)
                worst_xy = max(worst_xy, fro_norm(gens[x] @ O - O @ gens[x] - sym.c * O))
                for z in g.vertices:
                    if z not in (x, y):
                        worst_z = max(worst_z, fro_norm(gens[z] @ O - O @ gens[z]))
            report.add(name, f"[S_x,O]-cO:{corr.value}", worst_xy, tol, worst_xy < tol)
            report.add(name, f"[S_z,O]:{corr.value}", worst_z, tol, worst_z < tol)
        if spec.family in ("spin_su2", "loop_tq"):
            _su2_checks(report, name, spec, ops, tol)
    return report


def _su2_checks(report, name, spec, ops, tol, betas=(0.5, 1.0)):
    spectrum = ed.Spectrum(ops.hamiltonian_sparse)
    # full SU(2) invariance for spins; loop Hamiltonians only swap S1 and S3
    spin = spec.family == "spin_su2"
    worst_iso, worst_flip = 0.0, 0.0
    for beta in betas:
        for x, y in _ordered_pairs(spec.graph):
            c = ed.standard_correlators(spec, x, y, beta, ops=ops, spectrum=spectrum)
            worst_iso = max(worst_iso, abs(c["S1S1"] - c["S3S3"]))
            if spin:
                worst_iso = max(worst_iso, abs(c["S1S1"] - c["S2S2"]))
                worst_flip = max(worst_flip, abs(c["S+S-"] - 2 * c["S1S1"]))
    if spin:
        report.add(name, "<S1S1>=<S2S2>=<S3S3>", worst_iso, tol, worst_iso < tol)
        report.add(name, "<S+S->=2<S1S1>", worst_flip, tol, worst_flip < tol)
    else:
        report.add(name, "<S1S1>=<S3S3>", worst_iso, tol, worst_iso < tol)


def run_rotation(tol: float = 1e-9, kappas=(0.1, 0.3), instances=None) -> SuiteReport:
    """Complex-rotation identities on small spin-1/2 systems."""
    report = SuiteReport("rotation")
    for name, spec, pairs in instances or rotation_instances():
        if not _fits(spec):
            report.skip(name, "dimension cap exceeded")
            continue
        for kappa in kappas:
            for x, y in pairs:
                dec = verify_rotation_machinery(spec, x, y, kappa, tol=tol)
                label = f"{name}:x={x},y={y},kappa={kappa}"
                for check in ("rotO", "rot1", "B_antihermitian", "C_hermitian", "expB_unitary"):
                    report.add(label, check, dec.residuals[check], tol, dec.checks[check])
                report.add(label, "C_norm_bound", dec.norm_C, dec.norm_C_bound, dec.checks["C_norm_bound"])
                report.add(label, "trace_bound", dec.residuals["expectation"], dec.residuals["trace_bound"],
                           dec.checks["trace_bound"])
    return report


def run_correspondence(n_samples: int = 100_000, n_sweeps: int = 100_000, seed: int = DEFAULT_SEED,
                       n_sigma: float = 3.0, grid=None, x: int = 0, y: int = 3) -> SuiteReport:
    """Loop-model Monte Carlo against exact diagonalisation on the 2x2 square."""
    g = make_lattice("square", (2, 2))
    report = SuiteReport("correspondence")
    seeds = np.random.SeedSequence(seed).spawn(2 * len(grid or CORRESPONDENCE_GRID))
    for k, (theta, u, beta) in enumerate(grid or CORRESPONDENCE_GRID):
        spec = ModelSpec("loop_tq", graph=g, theta=theta, u=u)
        ops = ed.ModelOperators(spec)
        spectrum = ed.Spectrum(ops.hamiltonian_sparse)
        label = f"square2x2:theta={theta},u={u},beta={beta}"

        Z_exact = spectrum.partition_function(beta)
        Z = loops.estimate_partition_function(g, theta, u, beta, n_samples, seed=seeds[2 * k])
        report.add(label, "Z_direct", Z.mean, Z_exact, abs(Z.mean - Z_exact) <= n_sigma * Z.std_error,
                   f"stderr={Z.std_error:.3e}")

        S3 = spectrum.gibbs(beta).expect(ops.spin_op("S3", x) @ ops.spin_op("S3", y)).real
        P = loops.estimate_connectivity(g, x, y, theta, u, beta, n_sweeps, seed=seeds[2 * k + 1])
        scale = (theta * theta - 1) / 12
        est = loops.spin_correlation_from_loops(P.mean, theta)
        report.add(label, "S3S3_mcmc", est, S3, abs(est - S3) <= n_sigma * scale * P.std_error,
                   f"stderr={scale * P.std_error:.3e}")
    return report


def run_inequality(betas=(0.5, 1.0, 2.0), kappas=(0.1, 0.5, 1.0), instances=None) -> SuiteReport:
    """The decay inequality at fixed kappa against exact Gibbs correlators.

    Uses the graph's own perimeter constant and the exact lattice K-norm.
    Comparison is in log space; the reported value is the largest
    ``log|<O>| - log(bound)`` over pairs (must be <= 0).
    """
    report = SuiteReport("inequality")
    for name, spec in instances or inequality_instances():
        if not _fits(spec):
            report.skip(name, "dimension cap exceeded")
            continue
        ops = ed.ModelOperators(spec)
        g = spec.graph
        gamma = perimeter_constant(g)
        norms = {kappa: k_norm(ops.terms, g, kappa) for kappa in kappas}
        spectrum = ed.Spectrum(ops.hamiltonian_sparse)
        for corr in FAMILY_CORRELATORS[spec.family]:
            c = symmetry_for(spec, corr).c
            worst = {(b, k): -math.inf for b in betas for k in kappas}
            O_norm = None
            for x, y in _ordered_pairs(g):
                O = ops.correlator(corr, x, y)
                if O_norm is None:
                    # every correlator is a product of single-site pieces, so
                    # its norm does not depend on the pair
                    O_norm = ed.spectral_norm(O)
                d = g.distance(x, y)
                diag = spectrum.diagonal(O)
                for beta in betas:
                    value = abs(spectrum.thermal_average(diag, beta))
                    log_value = math.log(value) if value > 0 else -math.inf
                    for kappa in kappas:
                        log_rhs = decay_log_bound(kappa, c, gamma, norms[kappa], beta, O_norm, d)
                        worst[beta, kappa] = max(worst[beta, kappa], log_value - log_rhs)
            for (beta, kappa), gap in worst.items():
                report.add(name, f"{corr.value}:beta={beta},kappa={kappa}", gap, 0.0, gap <= 0.0)
    return report


def run_suite(name: str, **kwargs) -> SuiteReport:
    runners = {
        "symmetry": run_symmetry,
        "rotation": run_rotation,
        "correspondence": run_correspondence,
        "inequality": run_inequality,
    }
    if name not in runners:
        raise InputError(f"unknown suite {name!r}; expected one of {SUITES}")
    return runners[name](**kwargs)
