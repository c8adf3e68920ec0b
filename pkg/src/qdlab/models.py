"""Builders for the quantum double model and its two matter-coupled variants.

Three families share one gauge sector (``Z_N`` qunits on edges):

``double``
    the plain quantum double ``D(Z_N)``: vertex and face terms only.
``dual``
    ``D^K(Z_N)``: ``Z_K`` matter on face centroids, coupled to the gauge
    field by a homomorphism ``f(x) = n x``. Terms ``A_v``, ``B_p``, ``D_j``.
``vertex``
    ``D_M(Z_N)``: ``M``-level matter on vertices, acted on by a left action
    ``theta`` of ``Z_N``. Terms ``A_v``, ``B_p``, ``C_j``.

Every term is returned as a :class:`~qdlab.hilbert.LinearOp` supported on a
handful of sites. Components are written additively: the vertex component
``A^g`` shifts outgoing star edges by ``+g`` and incoming ones by ``-g``; the
edge component ``D^l`` shifts the left face by ``+l``, the edge by
``+f(l)`` and the right face by ``-l``.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .groups import CyclicGroup, Homomorphism, gsd_formula
from .hilbert import OP_TOL, LinearOp, OpSum, SiteLayout, commutator_norm
from .lattice import TorusLattice

__all__ = [
    "Family",
    "ThetaAction",
    "ModelSpec",
    "OperatorSet",
    "ProjectorFamily",
    "Model",
    "SolvabilityReport",
    "TotalHamiltonian",
    "build_vertex_op",
    "build_face_op",
    "build_edge_op_dual",
    "build_DM_ops",
    "build_projector_family",
    "build_operators",
    "build_hamiltonian",
    "build_total_hamiltonian",
    "solvability_check",
]


class Family(str, enum.Enum):
    DOUBLE = "double"
    DUAL = "dual"
    VERTEX = "vertex"


# ---------------------------------------------------------------------------------
# matter action for the vertex family
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaAction:
    """Left action of ``Z_N`` on ``{0, ..., M-1}``.

    ``kind`` is ``"trivial"`` (every ``g`` fixes every point), ``"regular"``
    (``M = N``, ``theta(g, a) = g + a``) or ``"blocks"``: ``blocks`` copies of
    the regular action followed by ``fixed`` fixed points, i.e. the
    permutation matrix of ``g`` is a direct sum of cyclic shifts and an
    identity block.
    """

    N: int
    M: int
    kind: str = "trivial"
    blocks: int = 0
    fixed: int = 0

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise ValueError("group and matter orders must be positive")
        if self.kind == "trivial":
            object.__setattr__(self, "blocks", 0)
            object.__setattr__(self, "fixed", self.M)
        elif self.kind == "regular":
            if self.M != self.N:
                raise ValueError(f"invalid theta: regular action needs M = N, got M={self.M}, N={self.N}")
            object.__setattr__(self, "blocks", 1)
            object.__setattr__(self, "fixed", 0)
        elif self.kind == "blocks":
            if self.blocks < 0 or self.fixed < 0 or self.blocks * self.N + self.fixed != self.M:
                raise ValueError(
                    f"invalid theta: {self.blocks} blocks of size {self.N} plus {self.fixed} "
                    f"fixed points do not give M={self.M}"
                )
        else:
            raise ValueError(f"invalid theta: unknown kind {self.kind!r}")

    @classmethod
    def trivial(cls, N: int, M: int) -> ThetaAction:
        return cls(N, M, "trivial")

    @classmethod
    def regular(cls, N: int) -> ThetaAction:
        return cls(N, N, "regular")

    @classmethod
    def block_shift(cls, N: int, blocks: int, fixed: int) -> ThetaAction:
        return cls(N, blocks * N + fixed, "blocks", blocks, fixed)

    @classmethod
    def parse(cls, text: str, N: int, M: int) -> ThetaAction:
        """Read ``trivial``, ``regular`` or ``blocks:B,F``."""
        text = text.strip().lower()
        if text in ("trivial", "regular"):
            return cls(N, M, text)
        m = re.fullmatch(r"blocks:(\d+),(\d+)", text)
        if not m:
            raise ValueError(f"invalid theta descriptor {text!r}")
        return cls(N, M, "blocks", int(m.group(1)), int(m.group(2)))

    @property
    def descriptor(self) -> str:
        if self.kind == "blocks":
            return f"blocks:{self.blocks},{self.fixed}"
        return self.kind

    def act(self, g, alpha):
        """``theta(g, alpha)``, vectorized over both arguments."""
        g = np.asarray(g) % self.N
        alpha = np.asarray(alpha)
        shifted = self.blocks * self.N
        in_block = alpha < shifted
        blk, pos = np.divmod(alpha, self.N)
        return np.where(in_block, blk * self.N + (pos + g) % self.N, alpha)

    def permutation(self, g: int) -> np.ndarray:
        return self.act(g, np.arange(self.M))

    def matrix(self, g: int) -> np.ndarray:
        """Permutation matrix ``Theta(g)`` with ``Theta(g)[theta(g,a), a] = 1``."""
        P = np.zeros((self.M, self.M))
        P[self.permutation(g), np.arange(self.M)] = 1.0
        return P

    def is_action(self) -> bool:
        perms = [self.permutation(g) for g in range(self.N)]
        if not np.array_equal(perms[0], np.arange(self.M)):
            return False
        for g, h in itertools.product(range(self.N), repeat=2):
            if not np.array_equal(perms[(g + h) % self.N], perms[g][perms[h]]):
                return False
        return all(len(set(p.tolist())) == self.M for p in perms)


# ---------------------------------------------------------------------------------
# model specification
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """Everything needed to build one model deterministically.

    Parameters
    ----------
    family : Family or str
    N : int
        Order of the gauge group ``Z_N``.
    K : int
        Matter order (``K`` for faces, ``M`` for vertices); forced to 1 for
        the plain double.
    n : int
        Homomorphism multiplier (dual family only).
    theta : ThetaAction or str, optional
        Matter action (vertex family only); defaults to the trivial action.
    rows, cols : int
        Torus dimensions.
    swap : bool
        Use the mirrored convention: ``p1``/``p2`` exchanged and the face
        word reversed. Spectra must not depend on it.
    """

    family: Family
    N: int
    K: int = 1
    n: int = 0
    theta: ThetaAction | str | None = None
    rows: int = 2
    cols: int = 2
    swap: bool = False

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise ValueError(f"unknown family {self.family!r}") from None
        object.__setattr__(self, "family", family)
        if self.N < 1 or self.K < 1:
            raise ValueError("group orders must be positive")
        if family is Family.DOUBLE:
            if self.K != 1 or self.n % self.N:
                raise ValueError("the plain double has no matter: use K=1, n=0")
            object.__setattr__(self, "n", 0)
        if family is Family.DUAL:
            object.__setattr__(self, "n", Homomorphism.from_orders(self.K, self.N, self.n).multiplier)
        if family is Family.VERTEX:
            theta = self.theta
            if theta is None:
                theta = ThetaAction.trivial(self.N, self.K)
            elif isinstance(theta, str):
                theta = ThetaAction.parse(theta, self.N, self.K)
            if (theta.N, theta.M) != (self.N, self.K):
                raise ValueError("invalid theta: action orders do not match (N, M)")
            if not theta.is_action():
                raise ValueError("invalid theta: not a left action")
            object.__setattr__(self, "theta", theta)
            object.__setattr__(self, "n", 0)
        elif self.theta is not None:
            raise ValueError("a theta action only applies to the vertex family")
        TorusLattice(self.rows, self.cols)

    # -- convenience constructors -------------------------------------------------------

    @classmethod
    def double(cls, N: int, rows: int = 2, cols: int = 2, **kw) -> ModelSpec:
        return cls(Family.DOUBLE, N, 1, 0, rows=rows, cols=cols, **kw)

    @classmethod
    def dual(cls, N: int, K: int, n: int = 0, rows: int = 2, cols: int = 2, **kw) -> ModelSpec:
        return cls(Family.DUAL, N, K, n, rows=rows, cols=cols, **kw)

    @classmethod
    def vertex(cls, N: int, M: int, theta="trivial", rows: int = 2, cols: int = 2, **kw) -> ModelSpec:
        return cls(Family.VERTEX, N, M, 0, theta, rows=rows, cols=cols, **kw)

    # -- derived ------------------------------------------------------------------------

    @property
    def M(self) -> int:
        return self.K

    @property
    def lattice(self) -> TorusLattice:
        return TorusLattice(self.rows, self.cols)

    @property
    def gauge(self) -> CyclicGroup:
        return CyclicGroup(self.N)

    @property
    def hom(self) -> Homomorphism:
        """Coupling ``Z_K -> Z_N``; trivial for the families without face matter."""
        K = self.K if self.family is Family.DUAL else 1
        return Homomorphism.from_orders(K, self.N, self.n)

    def layout(self) -> SiteLayout:
        lat = self.lattice
        if self.family is Family.DUAL:
            return SiteLayout.for_lattice(lat, self.N, faces=self.K)
        if self.family is Family.VERTEX:
            return SiteLayout.for_lattice(lat, self.N, vertices=self.K)
        return SiteLayout.for_lattice(lat, self.N)

    @property
    def dim(self) -> int:
        lat = self.lattice
        dim = self.N ** lat.n_edges
        if self.family is Family.DUAL:
            dim *= self.K ** lat.n_faces
        elif self.family is Family.VERTEX:
            dim *= self.K ** lat.n_vertices
        return dim

    @property
    def n_terms(self) -> int:
        lat = self.lattice
        extra = lat.n_edges if self.family is not Family.DOUBLE else 0
        return lat.n_vertices + lat.n_faces + extra

    @property
    def ground_energy(self) -> float:
        return -float(self.n_terms)

    def formula_gsd(self, genus: int = 1) -> int | None:
        """Closed-form degeneracy, known for the double and dual families."""
        if self.family is Family.VERTEX:
            return None
        return gsd_formula(self.hom, genus)

    @property
    def label(self) -> str:
        if self.family is Family.DOUBLE:
            return f"D(Z_{self.N})"
        if self.family is Family.DUAL:
            return f"D^{self.K}(Z_{self.N}) n={self.n}"
        return f"D_{self.K}(Z_{self.N}) theta={self.theta.descriptor}"

    def as_dict(self) -> dict:
        return {
            "family": self.family.value,
            "N": self.N,
            "K": self.K,
            "n": self.n,
            "theta": self.theta.descriptor if isinstance(self.theta, ThetaAction) else None,
            "rows": self.rows,
            "cols": self.cols,
            "swap": self.swap,
        }


# ---------------------------------------------------------------------------------
# local words
# ---------------------------------------------------------------------------------


def _layout_for(spec: ModelSpec, layout: SiteLayout | None) -> SiteLayout:
    return spec.layout() if layout is None else layout


def _edge_sites(layout, edges):
    return [layout.site("edge", j) for j in edges]


def face_word(spec: ModelSpec, r, s, t, u, gamma=0):
    """Holonomy word of a face from its role-ordered edge values.

    ``dual``: ``n*gamma + r - s - t + u`` (mirrored convention:
    ``n*gamma - r + s + t - u``); ``double`` uses the same word without
    matter; ``vertex``: ``-r + s + t - u``.
    """
    N = spec.N
    if spec.family is Family.VERTEX:
        return (-r + s + t - u) % N
    word = r - s - t + u
    if spec.swap:
        word = -word
    return (spec.n * np.asarray(gamma) + word) % N


def _face_sites(spec, layout, p):
    lat = spec.lattice
    edges = lat.face_boundary(p).edges
    sites = _edge_sites(layout, edges)
    if spec.family is Family.DUAL:
        sites.append(layout.site("face", p))
    return sites


def _holonomy(spec, digits):
    gamma = digits[:, 4] if spec.family is Family.DUAL else 0
    return face_word(spec, digits[:, 0], digits[:, 1], digits[:, 2], digits[:, 3], gamma)


def _vertex_component(spec, layout, v, g, with_matter):
    star = spec.lattice.vertex_star(v)
    sites = _edge_sites(layout, star.edges)
    if with_matter:
        sites.append(layout.site("vertex", v))
    signs = np.asarray(star.signs)

    def move(d):
        d[:, :4] += g * signs
        if with_matter:
            d[:, 4] = spec.theta.act(g, d[:, 4])
        return d

    return LinearOp.from_map(layout, sites, move, name=f"A^{g}_{v}")


def _edge_component(spec, layout, j, lam, p2_shift=-1):
    p1, p2 = spec.lattice.edge_faces(j, swap=spec.swap)
    sites = [layout.site("face", p1), layout.site("edge", j), layout.site("face", p2)]

    def move(d):
        d[:, 0] += lam
        d[:, 1] += spec.n * lam
        d[:, 2] += p2_shift * lam
        return d

    return LinearOp.from_map(layout, sites, move, name=f"D^{lam}_{j}")


def _average(components, weights, order, name):
    out = None
    for w, op in zip(weights, components):
        term = op * (w / order)
        out = term if out is None else out + term
    out.name = name
    return out


# ---------------------------------------------------------------------------------
# term builders
# ---------------------------------------------------------------------------------


def build_vertex_op(spec: ModelSpec, v: int, layout: SiteLayout | None = None) -> LinearOp:
    """Gauge projector ``A_v = (1/N) sum_g A^g_v``.

    For the vertex family the component also moves the vertex matter by
    ``theta(g, .)``.
    """
    layout = _layout_for(spec, layout)
    spec.lattice._check(v, spec.lattice.n_vertices, "vertex")
    matter = spec.family is Family.VERTEX
    comps = [_vertex_component(spec, layout, v, g, matter) for g in range(spec.N)]
    return _average(comps, np.ones(spec.N), spec.N, f"A_{v}")


def build_face_op(spec: ModelSpec, p: int, layout: SiteLayout | None = None, h: int = 0) -> LinearOp:
    """Flatness projector: 1 on basis states whose face word equals ``h``."""
    layout = _layout_for(spec, layout)
    spec.lattice._check(p, spec.lattice.n_faces, "face")
    sites = _face_sites(spec, layout, p)
    return LinearOp.diagonal(
        layout, sites, lambda d: (_holonomy(spec, d) == h % spec.N).astype(float), name=f"B_{p}"
    )


def build_edge_op_dual(spec: ModelSpec, j: int, layout: SiteLayout | None = None, *, p2_shift: int = -1) -> LinearOp:
    """Matter-transport projector ``D_j = (1/K) sum_l D^l_j`` (dual family).

    ``p2_shift`` is the multiple of ``l`` added to the right face; the
    correct value is ``-1``. Other values exist only to exercise the
    solvability checker on a broken operator.
    """
    if spec.family is not Family.DUAL:
        raise ValueError("edge transport terms belong to the dual family")
    layout = _layout_for(spec, layout)
    spec.lattice._check(j, spec.lattice.n_edges, "edge")
    comps = [_edge_component(spec, layout, j, lam, p2_shift) for lam in range(spec.K)]
    return _average(comps, np.ones(spec.K), spec.K, f"D_{j}")


def build_comparator_op(spec: ModelSpec, j: int, layout: SiteLayout | None = None) -> LinearOp:
    """Vertex-family edge term: ``C_j = delta(theta(-a, alpha), beta)``.

    ``a`` is the edge value, ``alpha`` the matter on its tail and ``beta`` on
    its head. Transporting the tail matter back along the edge makes the term
    gauge invariant at both endpoints.
    """
    if spec.family is not Family.VERTEX:
        raise ValueError("comparator terms belong to the vertex family")
    layout = _layout_for(spec, layout)
    tail, head = spec.lattice.endpoints(j)
    sites = [layout.site("edge", j), layout.site("vertex", tail), layout.site("vertex", head)]
    theta = spec.theta

    def diag(d):
        return (theta.act(-d[:, 0], d[:, 1]) == d[:, 2]).astype(float)

    return LinearOp.diagonal(layout, sites, diag, name=f"C_{j}")


def build_DM_ops(spec: ModelSpec, kind: str, site: int, layout: SiteLayout | None = None) -> LinearOp:
    """Vertex-family term of ``kind`` ``"A"``, ``"B"`` or ``"C"``."""
    if spec.family is not Family.VERTEX:
        raise ValueError("build_DM_ops needs a vertex-family spec")
    builders = {"A": build_vertex_op, "B": build_face_op, "C": build_comparator_op}
    try:
        return builders[kind.upper()](spec, site, layout)
    except KeyError:
        raise ValueError(f"unknown term kind {kind!r}") from None


# ---------------------------------------------------------------------------------
# projector families
# ---------------------------------------------------------------------------------


@dataclass
class ProjectorFamily:
    """Character-resolved refinement ``{P_J}`` of one term; ``members[0]`` is the term."""

    kind: str
    site: int
    members: list[LinearOp]

    def __len__(self):
        return len(self.members)

    def __getitem__(self, J):
        return self.members[J]

    def completeness_defect(self) -> float:
        total = self.members[0]
        for P in self.members[1:]:
            total = total + P
        return (total - 1.0).max_abs()

    def orthogonality_defect(self) -> float:
        worst = 0.0
        for a, Pa in enumerate(self.members):
            for b, Pb in enumerate(self.members):
                prod = Pa @ Pb
                target = prod - Pa if a == b else prod
                worst = max(worst, target.max_abs())
        return worst


def build_projector_family(
    spec: ModelSpec, kind: str, site: int, layout: SiteLayout | None = None
) -> ProjectorFamily:
    """``P_J = (1/|H|) sum_h conj(chi_J(h)) * component^h``.

    ``kind`` is ``"vertex"`` (components ``A^g``, ``H = Z_N``), ``"face"``
    (components ``omega^(g h')``, so ``P_J`` fixes the face word to ``J``) or
    ``"edge"`` (components ``D^l``, ``H = Z_K``; dual family only).
    """
    layout = _layout_for(spec, layout)
    N = spec.N
    if kind == "vertex":
        matter = spec.family is Family.VERTEX
        comps = [_vertex_component(spec, layout, site, g, matter) for g in range(N)]
        order = N
    elif kind == "face":
        sites = _face_sites(spec, layout, site)
        comps = [
            LinearOp.diagonal(layout, sites, lambda d, g=g: np.exp(2j * np.pi * g * _holonomy(spec, d) / N))
            for g in range(N)
        ]
        order = N
    elif kind == "edge":
        if spec.family is not Family.DUAL:
            raise ValueError("edge projector families exist only for the dual family")
        comps = [_edge_component(spec, layout, site, lam) for lam in range(spec.K)]
        order = spec.K
    else:
        raise ValueError(f"unknown term kind {kind!r}")
    x = np.arange(order)
    members = []
    for J in range(order):
        w = np.exp(-2j * np.pi * J * x / order)
        members.append(_average(comps, w, order, f"{kind}[{site}]_{J}"))
    return ProjectorFamily(kind, site, members)


# ---------------------------------------------------------------------------------
# whole models
# ---------------------------------------------------------------------------------


@dataclass
class OperatorSet:
    """All Hamiltonian terms, grouped as vertex / face / edge."""

    A: list[LinearOp]
    B: list[LinearOp]
    E: list[LinearOp] = field(default_factory=list)

    def groups(self) -> dict[str, list[LinearOp]]:
        return {"A": self.A, "B": self.B, "E": self.E}

    def all(self) -> list[LinearOp]:
        return self.A + self.B + self.E

    def __len__(self):
        return len(self.A) + len(self.B) + len(self.E)


def build_operators(spec: ModelSpec, layout: SiteLayout | None = None) -> OperatorSet:
    layout = _layout_for(spec, layout)
    lat = spec.lattice
    A = [build_vertex_op(spec, v, layout) for v in range(lat.n_vertices)]
    B = [build_face_op(spec, p, layout) for p in range(lat.n_faces)]
    if spec.family is Family.DUAL:
        E = [build_edge_op_dual(spec, j, layout) for j in range(lat.n_edges)]
    elif spec.family is Family.VERTEX:
        E = [build_comparator_op(spec, j, layout) for j in range(lat.n_edges)]
    else:
        E = []
    return OperatorSet(A, B, E)


class Model:
    """A built model: spec, layout, terms and Hamiltonian."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.layout = spec.layout()
        self.ops = build_operators(spec, self.layout)

    def __repr__(self):
        return f"<Model {self.spec.label} on {self.spec.rows}x{self.spec.cols}, dim={self.spec.dim}>"

    @property
    def lattice(self) -> TorusLattice:
        return self.spec.lattice

    @property
    def ground_energy(self) -> float:
        return self.spec.ground_energy

    @cached_property
    def hamiltonian(self) -> OpSum:
        return OpSum([(-1.0, op) for op in self.ops.all()])


def as_model(model) -> Model:
    return model if isinstance(model, Model) else Model(model)


def build_hamiltonian(spec: ModelSpec) -> tuple[OpSum, float]:
    """``H = -sum(all terms)`` and its ground energy ``-(number of terms)``."""
    model = Model(spec)
    return model.hamiltonian, model.ground_energy


# ---------------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------------


@dataclass
class SolvabilityReport:
    max_commutator: float
    max_projector_defect: float
    max_hermiticity_defect: float
    pairs_checked: int
    pairs_disjoint: int
    abelian: bool = True
    center_condition: bool = True
    worst_pair: tuple[str, str] | None = None
    error: str | None = None
    tol: float = OP_TOL

    @property
    def ok(self) -> bool:
        return (
            self.error is None
            and self.abelian
            and self.center_condition
            and self.max_commutator < self.tol
            and self.max_projector_defect < self.tol
            and self.max_hermiticity_defect < self.tol
        )

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "max_commutator": self.max_commutator,
            "max_projector_defect": self.max_projector_defect,
            "max_hermiticity_defect": self.max_hermiticity_defect,
            "pairs_checked": self.pairs_checked,
            "pairs_disjoint": self.pairs_disjoint,
            "abelian": self.abelian,
            "center_condition": self.center_condition,
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
            "error": self.error,
        }


def certify_terms(terms: list[LinearOp], tol: float = OP_TOL) -> SolvabilityReport:
    """Projector and pairwise-commutation defects of a list of terms."""
    worst, worst_pair, checked, disjoint = 0.0, None, 0, 0
    for a, b in itertools.combinations(terms, 2):
        if not set(a.sites) & set(b.sites):
            disjoint += 1
            continue
        checked += 1
        c = commutator_norm(a, b)
        if c > worst:
            worst, worst_pair = c, (a.name, b.name)
    return SolvabilityReport(
        max_commutator=worst,
        max_projector_defect=max((t.projector_defect() for t in terms), default=0.0),
        max_hermiticity_defect=max((t.hermiticity_defect() for t in terms), default=0.0),
        pairs_checked=checked,
        pairs_disjoint=disjoint,
        worst_pair=worst_pair,
        tol=tol,
    )


def solvability_check(spec_or_model, tol: float = OP_TOL, terms: list[LinearOp] | None = None) -> SolvabilityReport:
    """Certify that all terms are projectors and commute pairwise.

    Never raises: construction errors are reported in ``error``. ``terms``
    overrides the built operator list (used to test corrupted operators).
    """
    try:
        if terms is None:
            terms = as_model(spec_or_model).ops.all()
        spec = spec_or_model.spec if isinstance(spec_or_model, Model) else spec_or_model
        report = certify_terms(terms, tol)
        report.center_condition = spec.hom.image_in_center()
        return report
    except Exception as exc:  # report, never throw
        nan = float("nan")
        return SolvabilityReport(nan, nan, nan, 0, 0, error=f"{type(exc).__name__}: {exc}", tol=tol)


# ---------------------------------------------------------------------------------
# both matter sectors at once
# ---------------------------------------------------------------------------------


@dataclass
class TotalHamiltonian:
    layout: SiteLayout
    hamiltonian: OpSum
    dual_ops: OperatorSet
    vertex_ops: OperatorSet
    cross_commutators: dict[tuple[str, str], float]

    def as_dict(self) -> dict:
        return {f"{a}|{b}": v for (a, b), v in self.cross_commutators.items()}


def build_total_hamiltonian(dual: ModelSpec, vertex: ModelSpec) -> TotalHamiltonian:
    """Sum of a dual-family and a vertex-family Hamiltonian on one joint layout.

    Returns the pairwise cross-family commutator norms (largest over each
    pair of term groups); they are reported, not required to vanish.
    """
    if dual.family is not Family.DUAL or vertex.family is not Family.VERTEX:
        raise ValueError("expected one dual-family and one vertex-family spec")
    if dual.N != vertex.N or (dual.rows, dual.cols) != (vertex.rows, vertex.cols):
        raise ValueError("mismatched gauge group or lattice")
    layout = SiteLayout.for_lattice(dual.lattice, dual.N, faces=dual.K, vertices=vertex.K)
    dops = build_operators(dual, layout)
    vops = build_operators(vertex, layout)
    H = OpSum([(-1.0, op) for op in dops.all() + vops.all()])
    cross = {}
    for ka, ga in dops.groups().items():
        for kb, gb in vops.groups().items():
            worst = 0.0
            for a in ga:
                for b in gb:
                    worst = max(worst, commutator_norm(a, b))
            cross[(f"dual.{ka}", f"vertex.{kb}")] = worst
    return TotalHamiltonian(layout, H, dops, vops, cross)
