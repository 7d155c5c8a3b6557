from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decaybound.exceptions import InputError
from decaybound.lattice import make_lattice
from decaybound.models import (
    Correlator,
    ModelSpec,
    build_interaction,
    load_config,
    parse_config,
    spin_coupling_norm,
    symmetry_for,
)

SQ = make_lattice("square", (2, 2))


def test_parse_config_roundtrip(tmp_path):
    (tmp_path / "g.txt").write_text("n 3\n0 1\n1 2\n")
    cfg = tmp_path / "m.cfg"
    cfg.write_text("family = spin_su2\ngraph_file = g.txt\ns = 1\nc = 0.2, 0.04  # bilinear, biquadratic\nx=0\ny=2\n")
    spec = load_config(cfg)
    assert spec.s == 1 and spec.couplings == (0.2, 0.04)
    assert spec.graph.n_edges == 2 and spec.extra == {"x": 0, "y": 2}


def test_parse_config_lattice_and_gamma_override():
    spec = parse_config("family=loop_tq\nlattice=square\ndims=3x2\ntheta=3\nu=0.25\ngamma=7/2\n")
    assert spec.graph.n_vertices == 6 and spec.theta == 3 and spec.u == 0.25
    assert spec.perimeter() == Fraction(7, 2)


@pytest.mark.parametrize("text,match", [
    ("family=tj\nlattice=chain\ndims=4\ntheta=2\n", ":4: unknown key 'theta'"),
    ("family=tj\nfamily=tj\n", ":2: duplicate key"),
    ("family=tj\nJ=abc\n", ":2: bad value"),
    ("family=tj\nnonsense\n", ":2: expected key=value"),
    ("lattice=chain\n", "missing required key 'family'"),
    ("family=potts\n", ":1: unknown family"),
    ("family=spin_su2\ns=1\nc=0.5,0.5\n", "exceeds 1"),
    ("family=spin_su2\ns=1/2\nc=1,1\n", "k <= 2s"),
    ("family=loop_tq\nu=1.5\n", "u must lie"),
])
def test_parse_config_errors(text, match):
    with pytest.raises(InputError, match=match):
        parse_config(text)


def test_spin_coupling_norm():
    assert spin_coupling_norm((1.0,), Fraction(1, 2)) == pytest.approx(0.75)
    assert spin_coupling_norm((0.2, 0.04), 1) == pytest.approx(0.2 * 3 + 0.04 * 9)


@pytest.mark.parametrize("family,corr,c", [
    ("spin_su2", None, 2.0),
    ("loop_tq", None, 2.0),
    ("hubbard", "magnetic", 2.0),
    ("hubbard", "pair", 1.0),
    ("tj", "single_particle", 0.5),
    ("tj", None, 0.5),
])
def test_symmetry_constants(family, corr, c):
    assert symmetry_for(ModelSpec(family, graph=SQ), corr).c == c


def test_loop_constant_depends_on_theta():
    assert symmetry_for(ModelSpec("loop_tq", theta=3)).c == 1.0
    assert symmetry_for(ModelSpec("spin_su2", s=Fraction(3, 2))).c == pytest.approx(2 / 3)


def test_symmetry_rejects_foreign_correlator():
    with pytest.raises(InputError):
        symmetry_for(ModelSpec("spin_su2"), Correlator.PAIR)
    with pytest.raises(InputError):
        symmetry_for(ModelSpec("spin_su2"), "bogus")


def test_hubbard_terms_cover_connected_pairs():
    g = make_lattice("chain", 4)
    terms = build_interaction(ModelSpec("hubbard", graph=g, t=1.0, alpha=5.0, U=1.0))
    pairs = [t for t in terms if t.size == 2]
    assert len(pairs) == 6
    far = next(t for t in pairs if t.support == frozenset((0, 3)))
    assert far.norm_value == pytest.approx(2 * 4.0 ** -5)
    assert sum(t.size == 1 for t in terms) == 4


@settings(max_examples=25, deadline=None)
@given(theta=st.integers(2, 4), u=st.floats(0, 1))
def test_loop_norm_bound_dominates_exact_norm(theta, u):
    spec = ModelSpec("loop_tq", graph=make_lattice("chain", 2), theta=theta, u=u)
    bound = build_interaction(spec)[0].norm_value
    exact = build_interaction(spec, exact_norms=True)[0].norm_value
    assert exact <= bound + 1e-12


@pytest.mark.parametrize("spec", [
    ModelSpec("spin_su2", graph=make_lattice("chain", 2), s=1, couplings=(0.2, -0.04)),
    ModelSpec("tj", graph=make_lattice("chain", 2), t=0.7, J=-1.3),
    ModelSpec("hubbard", graph=make_lattice("chain", 3), t=-1.1, U=3.0, mu=0.4),
])
def test_norm_bounds_dominate_exact_norms(spec):
    for bound, exact in zip(build_interaction(spec), build_interaction(spec, exact_norms=True)):
        assert exact.norm_value <= bound.norm_value + 1e-12
