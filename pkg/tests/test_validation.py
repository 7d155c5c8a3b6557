import csv
import io

from decaybound import validation as V
from decaybound.lattice import make_lattice
from decaybound.models import ModelSpec


def test_report_csv_and_status():
    r = V.SuiteReport("demo")
    r.add("inst", "a", 1e-12, 1e-10, True)
    r.skip("big", "dimension cap exceeded")
    assert r.ok and r.n_failed == 0
    r.add("inst", "b", 1.0, 1e-10, False)
    assert not r.ok and [f.check for f in r.failures()] == ["b"]
    table = list(csv.DictReader(io.StringIO(r.to_csv())))
    assert [t["status"] for t in table] == ["pass", "skip", "fail"]


def test_dimension_cap_skips(monkeypatch):
    monkeypatch.setenv("DECAYBOUND_MAX_DIM", "8")
    report = V.run_symmetry(instances=[("chain4", ModelSpec("spin_su2", graph=make_lattice("chain", 4)))])
    assert report.ok and report.results[0].status == "skip"


def test_small_inequality_run():
    inst = [("tj_chain3", ModelSpec("tj", graph=make_lattice("chain", 3), t=1.0, J=0.5))]
    report = V.run_inequality(betas=(1.0,), kappas=(0.5,), instances=inst)
    assert report.ok and len(report.results) == 3


def test_small_correspondence_run():
    report = V.run_correspondence(n_samples=5000, n_sweeps=5000, grid=[(2, 1.0, 0.5)])
    assert [r.check for r in report.results] == ["Z_direct", "S3S3_mcmc"]
