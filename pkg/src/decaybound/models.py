"""Model families, their local interactions and U(1) symmetry data.

An interaction is a list of :class:`InteractionTerm` (support, norm). The
norm stored on a term is an upper bound on the operator norm of the local
Hamiltonian piece; by default it is the family's textbook bound
(e.g. ``||T|| = 1`` and ``||Q|| = theta`` for the loop Hamiltonian), which
is what makes the decay exponents reproduce the closed-form constants.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .exceptions import InputError
from .lattice import Graph, make_lattice, perimeter_constant, read_edge_list

FAMILIES = ("spin_su2", "loop_tq", "hubbard", "tj")

_NORM_SLACK = 1e-12


class Correlator(str, enum.Enum):
    """Two-point functions covered by the decay bound.

    SPIN_FLIP       S+_x S-_y                     (spin_su2)
    LOOP_FLIP       Q-_x Q+_y, Q+- = S1 +- i S3   (loop_tq)
    MAGNETIC        c+_{up,x} c_{dn,x} c+_{dn,y} c_{up,y}
    PAIR            c+_{up,x} c+_{dn,x} c_{up,y} c_{dn,y}
    SINGLE_PARTICLE c+_{up,x} c_{up,y}
    """

    SPIN_FLIP = "spin_flip"
    LOOP_FLIP = "loop_flip"
    MAGNETIC = "magnetic"
    PAIR = "pair"
    SINGLE_PARTICLE = "single_particle"


FAMILY_CORRELATORS = {
    "spin_su2": (Correlator.SPIN_FLIP,),
    "loop_tq": (Correlator.LOOP_FLIP,),
    "hubbard": (Correlator.MAGNETIC, Correlator.PAIR, Correlator.SINGLE_PARTICLE),
    "tj": (Correlator.MAGNETIC, Correlator.PAIR, Correlator.SINGLE_PARTICLE),
}

# default correlator per family: the one with the smallest c, hence the weakest exponent
DEFAULT_CORRELATOR = {
    "spin_su2": Correlator.SPIN_FLIP,
    "loop_tq": Correlator.LOOP_FLIP,
    "hubbard": Correlator.SINGLE_PARTICLE,
    "tj": Correlator.SINGLE_PARTICLE,
}


@dataclass(frozen=True)
class InteractionTerm:
    support: frozenset
    norm_value: float
    matrix_tag: tuple | None = None

    def __post_init__(self):
        if not self.support:
            raise InputError("interaction term with empty support")
        if not self.norm_value >= 0:
            raise InputError(f"negative norm {self.norm_value} on support {sorted(self.support)}")

    @property
    def size(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class SymmetryData:
    """Local generator ``S_x`` (normalised to norm 1), constant ``c`` and correlator."""

    generator_tag: str
    c: float
    correlator_tag: Correlator


@dataclass(frozen=True)
class ModelSpec:
    """One of the four model families on a graph.

    Parameters unused by a family are ignored. ``couplings`` for
    ``spin_su2`` is either one sequence ``(c_1, ..., c_2s)`` applied to all
    edges or a mapping ``edge -> sequence``. Hubbard hopping is
    ``t (d(x,y) + 1) ** -alpha`` between every connected pair; ``U`` and
    ``mu`` give the on-site potential ``U n_up n_dn - mu n``.
    """

    family: str
    graph: Graph | None = None
    s: Fraction = Fraction(1, 2)
    couplings: Sequence[float] | Mapping = (1.0,)
    theta: float = 2
    u: float = 1.0
    t: float = 1.0
    alpha: float = 5.0
    U: float = 0.0
    mu: float = 0.0
    J: float = 1.0
    gamma: Fraction | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown model family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "s", Fraction(self.s).limit_denominator(2))
        if self.gamma is not None:
            object.__setattr__(self, "gamma", Fraction(self.gamma).limit_denominator(10**6))

    @property
    def local_dim(self) -> int:
        if self.family == "spin_su2":
            return int(2 * self.s + 1)
        if self.family == "loop_tq":
            return int(self.theta)
        return 4

    def perimeter(self) -> Fraction:
        if self.gamma is not None:
            return self.gamma
        if self.graph is None:
            raise InputError("model has neither a graph nor an explicit gamma")
        return perimeter_constant(self.graph)

    def with_graph(self, graph: Graph) -> "ModelSpec":
        return replace(self, graph=graph)

    def edge_couplings(self, edge) -> tuple[float, ...]:
        if isinstance(self.couplings, Mapping):
            key = tuple(sorted(edge))
            if key not in self.couplings:
                return ()
            return tuple(float(c) for c in self.couplings[key])
        return tuple(float(c) for c in self.couplings)

    def validate(self, for_simulation: bool = False) -> None:
        """Raise :class:`InputError` naming the first violated model condition."""
        fam = self.family
        if fam == "spin_su2":
            if self.s <= 0 or (2 * self.s).denominator != 1:
                raise InputError(f"spin s must be a positive half-integer, got {self.s}")
            edges = self.graph.edges if self.graph is not None else [(0, 1)]
            for e in edges:
                cs = self.edge_couplings(e)
                if len(cs) > 2 * self.s:
                    raise InputError(f"edge {e}: {len(cs)} couplings but only k <= 2s = {2 * self.s} allowed")
                total = spin_coupling_norm(cs, self.s)
                if total > 1 + _NORM_SLACK:
                    raise InputError(f"edge {e}: sum_k |c_k| (3 s^2)^k = {total:.6g} exceeds 1")
        elif fam == "loop_tq":
            if not 0 <= self.u <= 1:
                raise InputError(f"u must lie in [0, 1], got {self.u}")
            if for_simulation:
                if not self.theta > 0:
                    raise InputError(f"theta must be positive, got {self.theta}")
            elif self.theta != int(self.theta) or self.theta < 2:
                raise InputError(f"theta must be an integer >= 2, got {self.theta}")
        elif fam == "hubbard":
            if not math.isfinite(self.alpha):
                raise InputError("alpha must be finite")

    @property
    def loop_spin(self) -> Fraction:
        return Fraction(int(self.theta) - 1, 2)


def spin_coupling_norm(couplings: Sequence[float], s) -> float:
    """``sum_k |c_k| (3 s^2)^k``, the normalisation bound on a spin pair term."""
    base = 3 * float(s) ** 2
    return sum(abs(c) * base ** k for k, c in enumerate(couplings, start=1))


def build_interaction(spec: ModelSpec, exact_norms: bool = False) -> list[InteractionTerm]:
    """Local terms of the family Hamiltonian on ``spec.graph``.

    Two-body terms carry the family norm bound; Hubbard on-site potentials
    appear as one-body terms (they never enter the K-norm). With
    ``exact_norms`` the spectral norm of each realised term is used instead.
    """
    if spec.graph is None:
        raise InputError("build_interaction needs a graph")
    spec.validate()
    g = spec.graph
    fam = spec.family
    terms = []
    if fam == "spin_su2":
        for e in g.edges:
            cs = spec.edge_couplings(e)
            if any(cs):
                terms.append(InteractionTerm(frozenset(e), spin_coupling_norm(cs, spec.s), ("spin", e)))
    elif fam == "loop_tq":
        bound = spec.u + (1 - spec.u) * spec.theta + 1
        terms = [InteractionTerm(frozenset(e), bound, ("loop", e)) for e in g.edges]
    elif fam == "hubbard":
        for x in g.vertices:
            for y in range(x + 1, g.n_vertices):
                d = g.distance(x, y)
                if d is None or spec.t == 0:
                    continue
                norm = 2 * abs(spec.t) * (d + 1) ** (-spec.alpha)
                terms.append(InteractionTerm(frozenset((x, y)), norm, ("hop", (x, y))))
        if spec.U or spec.mu:
            onsite = max(abs(spec.U - 2 * spec.mu), abs(spec.mu))
            terms += [InteractionTerm(frozenset((x,)), onsite, ("onsite", x)) for x in g.vertices]
    elif fam == "tj":
        bound = 2 * abs(spec.t) + abs(spec.J)
        terms = [InteractionTerm(frozenset(e), bound, ("tj", e)) for e in g.edges]
    if exact_norms:
        from .ed import term_matrix, spectral_norm

        terms = [replace(term, norm_value=spectral_norm(term_matrix(spec, term))) for term in terms]
    return terms


def symmetry_for(spec: ModelSpec, correlator: Correlator | str | None = None) -> SymmetryData:
    """Generator ``S_x`` and commutator constant ``c`` for a correlator.

    ``[S_x, O_xy] = c O_xy`` and ``[S_z, O_xy] = 0`` for ``z`` not in ``{x, y}``.
    """
    if correlator is None:
        correlator = DEFAULT_CORRELATOR[spec.family]
    try:
        correlator = Correlator(correlator)
    except ValueError:
        raise InputError(f"unknown correlator {correlator!r}") from None
    if correlator not in FAMILY_CORRELATORS[spec.family]:
        raise InputError(f"correlator {correlator.value!r} is not defined for family {spec.family!r}")
    if spec.family == "spin_su2":
        return SymmetryData("S3/s", 1 / float(spec.s), correlator)
    if spec.family == "loop_tq":
        # theta = 2s + 1, so c = 1/s = 2 / (theta - 1)
        return SymmetryData("S2/s", 2 / (float(spec.theta) - 1), correlator)
    if correlator is Correlator.MAGNETIC:
        return SymmetryData("n_up-n_dn", 2.0, correlator)
    if correlator is Correlator.PAIR:
        return SymmetryData("(n_up+n_dn)/2", 1.0, correlator)
    return SymmetryData("(n_up+n_dn)/2", 0.5, correlator)


# ---------------------------------------------------------------- config files

_GRAPH_KEYS = {"lattice", "dims", "boundary", "graph_file"}
_FAMILY_KEYS = {
    "spin_su2": {"s", "c"},
    "loop_tq": {"theta", "u"},
    "hubbard": {"t", "alpha", "U", "mu"},
    "tj": {"t", "J"},
}
_COMMON_KEYS = {"family", "gamma", "x", "y"} | _GRAPH_KEYS


def parse_config(text: str, source: str = "<config>", base_dir: Path | None = None) -> ModelSpec:
    """Parse a flat ``key=value`` model description.

    Recognised keys: ``family``; graph keys ``lattice``, ``dims`` (``7x7``),
    ``boundary``, ``graph_file``; optional ``gamma`` override and a default
    pair ``x``, ``y``; family keys ``s, c`` (comma separated c_1..c_2s),
    ``theta, u``, ``t, alpha, U, mu``, ``t, J``. Unknown keys are errors.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise InputError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = (value, lineno)
    if "family" not in raw:
        raise InputError(f"{source}: missing required key 'family'")
    family = raw["family"][0]
    if family not in FAMILIES:
        raise InputError(f"{source}:{raw['family'][1]}: unknown family {family!r}")
    allowed = _COMMON_KEYS | _FAMILY_KEYS[family]
    for key, (_, lineno) in raw.items():
        if key not in allowed:
            raise InputError(f"{source}:{lineno}: unknown key {key!r} for family {family}")

    def num(key, conv=float):
        value, lineno = raw[key]
        try:
            return conv(value)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{source}:{lineno}: bad value {value!r} for {key}") from None

    kwargs = {}
    if "s" in raw:
        kwargs["s"] = num("s", Fraction)
    if "c" in raw:
        value, lineno = raw["c"]
        try:
            kwargs["couplings"] = tuple(float(v) for v in value.split(","))
        except ValueError:
            raise InputError(f"{source}:{lineno}: bad coupling list {value!r}") from None
    for key in ("theta", "u", "t", "alpha", "U", "mu", "J"):
        if key in raw:
            kwargs[key] = num(key)
    if "gamma" in raw:
        kwargs["gamma"] = num("gamma", Fraction)

    graph = None
    if "graph_file" in raw:
        path = Path(raw["graph_file"][0])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        graph = read_edge_list(path)
    elif "lattice" in raw:
        kind = raw["lattice"][0]
        if "dims" not in raw:
            raise InputError(f"{source}: lattice given without dims")
        value, lineno = raw["dims"]
        try:
            dims = tuple(int(v) for v in value.replace("x", ",").split(","))
        except ValueError:
            raise InputError(f"{source}:{lineno}: bad dims {value!r}") from None
        boundary = raw.get("boundary", ("open", 0))[0]
        graph = make_lattice(kind, dims, boundary)
    extra = {k: int(raw[k][0]) for k in ("x", "y") if k in raw}
    spec = ModelSpec(family=family, graph=graph, extra=extra, **kwargs)
    spec.validate(for_simulation=True)
    return spec


def load_config(path) -> ModelSpec:
    path = Path(path)
    return parse_config(path.read_text(), source=str(path), base_dir=path.parent)
