"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
A summary of all criterion lines is appended to the pytest terminal report.
"""
import math
import sys
import time

import numpy as np
import pytest

from decaybound import loops as L
from decaybound import validation as V
from decaybound.bounds import SPIN_ASYMPTOTE_NOTE, model_bound, zeta_sum
from decaybound.cli import main
from decaybound.lattice import make_lattice, perimeter_constant
from decaybound.models import ModelSpec


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_01_perimeter_constants(record_criterion):
    with Timer() as t:
        got = {
            "square7x7": perimeter_constant(make_lattice("square", (7, 7))),
            "edge": perimeter_constant(make_lattice("chain", 2)),
            "triangular7x7": perimeter_constant(make_lattice("triangular", (7, 7))),
        }
    ok = got == {"square7x7": 4, "edge": 1, "triangular7x7": 6} and t.elapsed < 1
    record_criterion(1, "perimeter constants", ok, f"{ {k: str(v) for k, v in got.items()} } in {t.elapsed:.2f}s")
    assert ok


def test_criterion_02_asymptotic_exponents(record_criterion):
    g = make_lattice("square", (7, 7))
    gamma = 4
    cases = [
        ("loop theta=2 u=1", ModelSpec("loop_tq", graph=g, theta=2, u=1), 1 / 256),
        ("loop theta=3 u=0.5", ModelSpec("loop_tq", graph=g, theta=3, u=0.5),
         1 / (8 * gamma**2 * 2**2 * (0.5 + 0.5 * 3 + 1))),
        ("hubbard alpha=5", ModelSpec("hubbard", graph=g, t=1, alpha=5), 1 / (64 * gamma**2 * math.pi**2 / 6)),
        ("hubbard alpha=6 t=0.5", ModelSpec("hubbard", graph=g, t=0.5, alpha=6),
         1 / (64 * gamma**2 * 0.5 * zeta_sum(3))),
        ("tj t=1 J=1", ModelSpec("tj", graph=g, t=1, J=1), 1 / (128 * gamma**2 * 3)),
        ("tj t=0.5 J=2", ModelSpec("tj", graph=g, t=0.5, J=2), 1 / (128 * gamma**2 * 3)),
        # normalised spin couplings: sum_k |c_k| (3 s^2)^k = 1
        ("spin s=1/2", ModelSpec("spin_su2", graph=g, couplings=(4 / 3,)), 1 / (32 * 0.25 * gamma**2)),
        ("spin s=1", ModelSpec("spin_su2", graph=g, s=1, couplings=(1 / 3,)), 1 / (32 * 1 * gamma**2)),
    ]
    beta = 1e8
    worst = 0.0
    with Timer() as t:
        for _, spec, expected in cases:
            b = model_bound(spec, beta)
            worst = max(worst, abs(beta * b.xi / expected - 1))
    ok = worst < 1e-3 and t.elapsed < 5
    record_criterion(2, "asymptotic exponents", ok,
                     f"max rel err {worst:.2e} over {len(cases)} cases in {t.elapsed:.2f}s; {SPIN_ASYMPTOTE_NOTE}")
    assert ok


@pytest.fixture(scope="module")
def symmetry_report():
    with Timer() as t:
        report = V.run_symmetry(tol=1e-10)
    return report, t.elapsed


def test_criterion_03_symmetry_suite(record_criterion, symmetry_report):
    report, elapsed = symmetry_report
    checks = [r for r in report.results if r.check.startswith("[")]
    worst = max(r.value for r in checks)
    ok = all(r.status == "pass" for r in checks) and elapsed < 30
    record_criterion(3, "symmetry commutators", ok,
                     f"{len(checks)} checks, max norm {worst:.1e} in {elapsed:.1f}s")
    assert ok


def test_criterion_04_rotation_machinery(record_criterion):
    with Timer() as t:
        report = V.run_rotation(tol=1e-9, kappas=(0.1, 0.3))
    wanted = {"rotO", "B_antihermitian", "C_hermitian", "C_norm_bound"}
    checks = [r for r in report.results if r.check in wanted]
    ok = report.ok and len(checks) == 2 * 3 * 2 * len(wanted) and t.elapsed < 60
    record_criterion(4, "rotation machinery", ok, f"{len(report.results)} checks in {t.elapsed:.1f}s")
    assert ok


def test_criterion_05_decay_inequality(record_criterion):
    with Timer() as t:
        report = V.run_inequality(betas=(0.5, 1.0, 2.0), kappas=(0.1, 0.5, 1.0))
    ran = [r for r in report.results if r.status != "skip"]
    margin = max(r.value for r in ran)
    ok = report.ok and len(ran) == len(report.results) and t.elapsed < 300
    record_criterion(5, "decay inequality on ED instances", ok,
                     f"{len(ran)} (instance, correlator, beta, kappa) cells, "
                     f"largest log(lhs/rhs) = {margin:.3f} in {t.elapsed:.1f}s")
    assert ok


def test_criterion_06_su2_identities(record_criterion, symmetry_report):
    report, elapsed = symmetry_report
    checks = [r for r in report.results if r.check.startswith("<")]
    ok = len(checks) >= 5 and all(r.status == "pass" for r in checks) and elapsed < 30
    record_criterion(6, "SU(2) correlator identities", ok,
                     f"{len(checks)} checks, max deviation {max(r.value for r in checks):.1e}")
    assert ok


def test_criterion_07_loop_spin_correspondence(record_criterion):
    with Timer() as t:
        report = V.run_correspondence(n_samples=100_000, n_sweeps=100_000, n_sigma=3.0)
    detail = "; ".join(f"{r.instance.split(':')[1]} {r.check} {'ok' if r.passed else 'FAIL'}"
                       for r in report.results if not r.passed) or "all 24 comparisons within 3 sigma"
    ok = report.ok and len(report.results) == 24 and t.elapsed < 600
    record_criterion(7, "loop-spin correspondence", ok, f"{detail} in {t.elapsed:.0f}s")
    assert ok


def test_criterion_08_sampler_exactness(record_criterion):
    g = make_lattice("square", (2, 2))
    beta, u, n = 1.0, 0.5, 100_000
    with Timer() as t:
        run = L.run_chain(g, [(0, 3)], 1.0, u, beta, n, seed=V.DEFAULT_SEED)
        z_scores = []
        for k in range(g.n_edges):
            counts = run.edge_counts[:, k].astype(float)
            mean = L.batch_means(counts)
            var = L.batch_means((counts - beta) ** 2)  # E (n - beta)^2 = beta for Poisson(beta)
            z_scores += [(mean.mean - beta) / mean.std_error, (var.mean - beta) / var.std_error]
        mc = L.batch_means(run.indicators[:, 0])
        direct = L.direct_connectivity(g, 0, 3, 1.0, u, beta, n, seed=V.DEFAULT_SEED + 1)
        z_conn = (mc.mean - direct.mean) / math.hypot(mc.std_error, direct.std_error)
    worst = max(abs(z) for z in z_scores)
    ok = worst < 4 and abs(z_conn) < 3 and t.elapsed < 120
    record_criterion(8, "sampler exactness at theta=1", ok,
                     f"max |z| count moments {worst:.2f}, connectivity z {z_conn:+.2f} in {t.elapsed:.0f}s")
    assert ok


def test_criterion_09_loop_tracing_oracle(record_criterion):
    g = make_lattice("square", (2, 3))
    n = g.n_vertices
    with Timer() as t:
        cfg = lambda ev: L.LoopConfig.from_events(g, 1.0, ev)  # noqa: E731
        counts = [
            L.trace_loops(L.LoopConfig.empty(g, 1.0)).count,
            L.trace_loops(cfg({(0, 1): [(0.4, L.CROSS)]})).count,
            L.trace_loops(cfg({(0, 1): [(0.4, L.DOUBLE_BAR)]})).count,
            L.trace_loops(cfg({(0, 1): [(0.2, L.CROSS), (0.6, L.CROSS)]})).count,
        ]
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(100):
            beta = float(rng.uniform(0.1, 3))
            part = L.trace_loops(L.direct_sample(g, beta, float(rng.random()), rng))
            worst = max(worst, abs(part.total_length() - n * beta))
    ok = counts == [n, n - 1, n - 1, n] and worst <= 1e-12 and t.elapsed < 1
    record_criterion(9, "loop tracing oracle", ok, f"counts {counts} (n={n}), length error {worst:.1e}")
    assert ok


def test_criterion_10_reproducibility(record_criterion, tmp_path):
    cfg = tmp_path / "loop.cfg"
    cfg.write_text("family=loop_tq\nlattice=square\ndims=2x2\ntheta=3\nu=0.5\nx=0\ny=3\n")
    outputs = []
    with Timer() as t:
        for run in range(2):
            files = []
            for cmd in (["loops", "--sweeps", "3000", "--beta", "0.5,1"], ["xi", "--beta", "1,100"],
                        ["correlators", "--beta", "1"]):
                out = tmp_path / f"{cmd[0]}{run}.csv"
                assert main(cmd + ["--config", str(cfg), "--seed", "12345", "--out", str(out)]) == 0
                files.append(out.read_bytes())
            outputs.append(files)
    ok = outputs[0] == outputs[1] and t.elapsed < 60
    record_criterion(10, "byte-identical CSV for identical seed", ok, f"3 commands x 2 runs in {t.elapsed:.1f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
