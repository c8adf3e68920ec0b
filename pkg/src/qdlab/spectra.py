"""Ground spaces, string operators and the character-basis picture of the edge term.

The ground-space dimension is the trace of the ordered product of every
Hamiltonian term. Writing the terms as ``prod(A) prod(B) prod(D)`` with every
``B`` diagonal in the computational basis, cyclicity of the trace gives::

    Tr = sum_x b(x) <(prod D)^dagger e_x | prod(A) e_x>

where ``b(x)`` is the product of the face diagonals. Only basis states with
``b(x) != 0`` are swept, and both sides of the inner product are built as
sparse vectors. Nothing in this identity assumes the terms commute; if they
do, the trace is the rank of the common +1 eigenspace and must be an integer.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _kernels
from .groups import GroupElement, fourier_transform
from .hilbert import (
    DENSE_LIMIT,
    NORM_TOL,
    OP_TOL,
    LinearOp,
    SiteLayout,
    StateVector,
    _pack_ops,
    character_basis,
)
from .lattice import DualPath, Path, straight_dual_path, straight_path
from .models import Family, Model, ModelSpec, as_model, build_projector_family, face_word

__all__ = [
    "DEFAULT_CAP",
    "ConsistencyError",
    "CapExceeded",
    "SpectralReport",
    "ConfinementProfile",
    "WOperator",
    "WOperatorTable",
    "EdgeSpectrum",
    "dimension_cap",
    "ground_space_dimension",
    "gsd_report",
    "ground_state",
    "energy",
    "string_z",
    "string_x",
    "confinement_profile",
    "solve_w_operators",
    "diagonalize_edge_op",
    "edge_eigenvalue_formula",
    "fake_holonomy",
    "dense_spectrum",
    "ground_multiplicity",
]

DEFAULT_CAP = 2_000_000
TRACE_TOL = 1e-6


class ConsistencyError(RuntimeError):
    """A numerical result violated an identity it must satisfy exactly."""


class CapExceeded(ValueError):
    pass


def dimension_cap(cap: int | None = None) -> int:
    """Explicit ``cap``, else ``QDLAB_CAP`` from the environment, else the default."""
    if cap is not None:
        return int(cap)
    env = os.environ.get("QDLAB_CAP")
    return int(env) if env else DEFAULT_CAP


# ---------------------------------------------------------------------------------
# ground-space dimension
# ---------------------------------------------------------------------------------


@dataclass
class SpectralReport:
    dimension: int
    formula: int | None
    trace: float
    hilbert_dim: int
    swept: int
    seconds: float = field(compare=False, default=0.0)

    @property
    def match(self) -> bool | None:
        return None if self.formula is None else self.dimension == self.formula

    def as_dict(self) -> dict:
        return {
            "oracle": self.dimension,
            "formula": self.formula,
            "match": self.match,
            "trace": self.trace,
            "hilbert_dim": self.hilbert_dim,
            "swept": self.swept,
        }


def _trace_parts(model: Model):
    """``(diagonal, left, right)`` operator lists for the trace identity."""
    ops = model.ops
    if model.spec.family is Family.VERTEX:
        # comparators are diagonal as well
        return ops.B + ops.E, [], ops.A
    return ops.B, [d.adjoint() for d in ops.E], ops.A


def gsd_report(model, cap: int | None = None) -> SpectralReport:
    model = as_model(model)
    spec = model.spec
    limit = dimension_cap(cap)
    dim = spec.dim
    if dim > limit:
        raise CapExceeded(f"Hilbert-space dimension {dim} exceeds the cap {limit} (set --cap or QDLAB_CAP)")
    t0 = time.perf_counter()
    diag, left, right = _trace_parts(model)
    for op in diag:
        if not op.is_diagonal():
            raise ConsistencyError(f"{op.name} is expected to be diagonal")
    xs, ws = _kernels.diagonal_weights(dim, _pack_ops(diag))
    vals = _kernels.trace_sweep(xs, ws, _pack_ops(left), _pack_ops(right), dim)
    total = complex(np.sum(vals))
    rounded = int(round(total.real))
    if abs(total - rounded) > TRACE_TOL:
        raise ConsistencyError(f"trace {total!r} is not an integer within {TRACE_TOL}")
    return SpectralReport(rounded, spec.formula_gsd(), total.real, dim, len(xs), time.perf_counter() - t0)


def _product_trace(dim: int, diag, left, right) -> int:
    xs, ws = _kernels.diagonal_weights(dim, _pack_ops(diag))
    total = complex(np.sum(_kernels.trace_sweep(xs, ws, _pack_ops(left), _pack_ops(right), dim)))
    rounded = int(round(total.real))
    if abs(total - rounded) > TRACE_TOL:
        raise ConsistencyError(f"trace {total!r} is not an integer within {TRACE_TOL}")
    return rounded


def first_levels(model, cap: int | None = None) -> tuple[int, int]:
    """Exact multiplicities of the ground level and the first excited level.

    The first excited space is the direct sum over terms ``i`` of the range
    of ``(1 - P_i) prod_{j != i} P_j``, whose trace is
    ``Tr prod_{j != i} P_j - Tr prod_j P_j``. Every trace is a trace sweep,
    so no diagonalization is involved.
    """
    model = as_model(model)
    dim = model.spec.dim
    limit = dimension_cap(cap)
    if dim > limit:
        raise CapExceeded(f"Hilbert-space dimension {dim} exceeds the cap {limit} (set --cap or QDLAB_CAP)")
    parts = _trace_parts(model)
    g0 = _product_trace(dim, *parts)
    g1 = 0
    for which, ops in enumerate(parts):
        for k in range(len(ops)):
            reduced = list(parts)
            reduced[which] = ops[:k] + ops[k + 1 :]
            g1 += _product_trace(dim, *reduced) - g0
    return g0, g1


def ground_space_dimension(model, cap: int | None = None) -> int:
    """Rank of the ground-space projector, computed by the trace sweep."""
    return gsd_report(model, cap).dimension


# ---------------------------------------------------------------------------------
# states and energies
# ---------------------------------------------------------------------------------


def _project(model: Model, psi: StateVector) -> StateVector:
    for op in model.ops.E + model.ops.B + model.ops.A:
        psi = op.apply(psi)
    return psi


def ground_state(model, alpha: int = 0, face: int = 0) -> StateVector:
    """Normalized projection of the reference product state.

    The reference has every edge and matter site at 0 except face ``face``
    (dual family), which holds ``alpha``.
    """
    model = as_model(model)
    layout = model.layout
    digits = np.zeros(layout.n_sites, dtype=np.int64)
    if alpha:
        if model.spec.family is not Family.DUAL:
            raise ValueError("a face reference value needs face matter")
        digits[layout.site("face", face)] = alpha % model.spec.K
    psi = _project(model, StateVector.basis(layout, digits))
    if psi.norm() < NORM_TOL:
        raise ValueError("reference state outside ground sector")
    return psi.normalized()


def energy(model, psi: StateVector) -> float:
    """``<psi|H|psi> / <psi|psi>`` with ``H = -sum(terms)``."""
    model = as_model(model)
    norm2 = psi.norm() ** 2
    total = 0.0
    for op in model.ops.all():
        total -= psi.inner(op.apply(psi)).real
    return total / norm2


def term_violations(model, psi: StateVector) -> dict[str, float]:
    """Per-group sum of ``1 - <P>`` for a normalized state."""
    model = as_model(model)
    out = {}
    for key, group in model.ops.groups().items():
        out[key] = float(sum(1.0 - psi.inner(op.apply(psi)).real for op in group))
    return out


# ---------------------------------------------------------------------------------
# string operators
# ---------------------------------------------------------------------------------


def _layout_of(model) -> SiteLayout:
    return model.layout if isinstance(model, Model) else model.layout()


def _spec_of(model) -> ModelSpec:
    return model.spec if isinstance(model, Model) else model


def string_z(model, path: Path, g: int) -> LinearOp:
    """``prod_k Z_{e_k}^{s_k g}`` along a primal path (identity for an empty path)."""
    spec, layout = _spec_of(model), _layout_of(model)
    if len(path) and not spec.lattice.is_valid_path(path):
        raise ValueError("invalid path")
    if len(set(path.edges)) != len(path.edges):
        raise ValueError("invalid path: repeated edge")
    sites = [layout.site("edge", j) for j in path.edges]
    signs = np.asarray(path.signs, dtype=np.int64)
    N = spec.N
    return LinearOp.diagonal(
        layout, sites, lambda d: np.exp(2j * np.pi * g * (d @ signs) / N), name=f"Z-string[{g}]"
    )


def string_x(model, path: DualPath, g: int) -> LinearOp:
    """``prod_k X_{e_k}^{s_k g}`` along a dual path (identity for an empty path)."""
    spec, layout = _spec_of(model), _layout_of(model)
    if len(path) and not spec.lattice.is_valid_dual_path(path):
        raise ValueError("invalid path")
    if len(set(path.edges)) != len(path.edges):
        raise ValueError("invalid path: repeated edge")
    sites = [layout.site("edge", j) for j in path.edges]
    shift = g * np.asarray(path.signs, dtype=np.int64)
    return LinearOp.from_map(layout, sites, lambda d: d + shift, name=f"X-string[{g}]")


@dataclass
class ConfinementProfile:
    g: int
    kind: str
    lengths: list[int]
    delta_e: list[float]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError("lengths must be strictly increasing")

    def rows(self) -> list[tuple[int, float]]:
        return list(zip(self.lengths, self.delta_e))

    def is_constant(self, tol: float = 1e-8) -> bool:
        return bool(np.ptp(self.delta_e) < tol) if self.delta_e else True

    def is_strictly_increasing(self, tol: float = 1e-8) -> bool:
        return all(b - a > tol for a, b in zip(self.delta_e, self.delta_e[1:]))

    def sparkline(self) -> str:
        bars = " ▁▂▃▄▅▆▇█"
        if not self.delta_e:
            return ""
        top = max(self.delta_e) or 1.0
        return "".join(bars[int(round(8 * max(e, 0.0) / top))] for e in self.delta_e)

    def as_dict(self) -> dict:
        return {"g": self.g, "kind": self.kind, "lengths": self.lengths, "delta_e": self.delta_e}


def confinement_profile(
    model,
    g: int,
    lengths,
    kind: str = "z",
    start: int = 0,
    direction: str = "+x",
    reference: StateVector | None = None,
) -> ConfinementProfile:
    """Energy cost of a straight string of each length applied to a ground state.

    ``kind="z"`` uses a primal path from vertex ``start``; ``kind="x"`` a
    dual path from face ``start``.
    """
    model = as_model(model)
    lengths = [int(L) for L in lengths]
    xi = ground_state(model) if reference is None else reference
    e0 = energy(model, xi)
    out = []
    for L in lengths:
        if kind == "z":
            op = string_z(model, straight_path(model.lattice, start, direction, L), g)
        elif kind == "x":
            op = string_x(model, straight_dual_path(model.lattice, start, direction, L), g)
        else:
            raise ValueError(f"unknown string kind {kind!r}")
        psi = op.apply(xi)
        out.append(energy(model, psi) - e0)
    return ConfinementProfile(g, kind, lengths, out)


# ---------------------------------------------------------------------------------
# W-operators
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class WOperator:
    a: int
    b: int
    op: LinearOp = field(compare=False, repr=False)

    @property
    def label(self) -> str:
        x = "" if self.a == 0 else ("X" if self.a == 1 else f"X^{self.a}")
        z = "" if self.b == 0 else ("Z" if self.b == 1 else f"Z^{self.b}")
        return (x + z) or "1"


@dataclass
class WOperatorTable:
    """Solutions keyed by ``(J, Kp)``: face label ``J`` in ``Z_N``, edge label ``Kp`` in ``Z_K``."""

    face: int
    N: int
    K: int
    entries: dict[tuple[int, int], list[WOperator]]

    def labels(self) -> dict[tuple[int, int], list[str]]:
        return {k: [w.label for w in v] for k, v in self.entries.items()}

    def monomials(self) -> dict[tuple[int, int], list[tuple[int, int]]]:
        return {k: [(w.a, w.b) for w in v] for k, v in self.entries.items()}


def _face_monomial(layout, site, K, a, b) -> LinearOp:
    x = np.arange(K)
    mat = np.zeros((K, K), dtype=complex)
    mat[(x + a) % K, x] = np.exp(2j * np.pi * b * x / K)
    return LinearOp(layout, (site,), mat)


def solve_w_operators(model, face: int = 0, tol: float = OP_TOL) -> WOperatorTable:
    """Face monomials ``W = X^a Z^b`` that move the face and edge labels.

    ``W`` is listed under ``(J, Kp)`` when ``B_{p,J} W = W B_{p,0}`` and, for
    every boundary edge ``j``, ``D_{j, s_j Kp} W = W D_{j,0}``, where
    ``s_j = +1`` if ``p`` is the right face of ``j`` and ``-1`` if it is the
    left one (the shift reaches the two faces of an edge with opposite signs).
    """
    model = as_model(model)
    spec = model.spec
    if spec.family is not Family.DUAL:
        raise ValueError("W-operators act on face matter (dual family)")
    layout, lat = model.layout, model.lattice
    N, K = spec.N, spec.K
    site = layout.site("face", face)
    bfam = build_projector_family(spec, "face", face, layout)
    edges = lat.face_boundary(face).edges
    dfams, sigma = {}, {}
    for j in set(edges):
        dfams[j] = build_projector_family(spec, "edge", j, layout)
        p1, p2 = lat.edge_faces(j, swap=spec.swap)
        sigma[j] = 1 if p2 == face else -1
    entries: dict[tuple[int, int], list[WOperator]] = {(J, Kp): [] for J in range(N) for Kp in range(K)}
    for a in range(K):
        for b in range(K):
            W = _face_monomial(layout, site, K, a, b)
            Js = [J for J in range(N) if (bfam[J] @ W - W @ bfam[0]).max_abs() < tol]
            Ks = [
                Kp
                for Kp in range(K)
                if all((dfams[j][(sigma[j] * Kp) % K] @ W - W @ dfams[j][0]).max_abs() < tol for j in dfams)
            ]
            for J in Js:
                for Kp in Ks:
                    entries[(J, Kp)].append(WOperator(a, b, W))
    return WOperatorTable(face, N, K, entries)


# ---------------------------------------------------------------------------------
# character basis and the edge term
# ---------------------------------------------------------------------------------


@dataclass
class EdgeSpectrum:
    """Eigenvalues of ``D_j`` on character-basis states ``|alpha', g', beta'>``."""

    edge: int
    labels: list[tuple[int, int, int]]
    eigenvalues: np.ndarray
    predicted: np.ndarray
    max_offdiag: float

    @property
    def max_formula_error(self) -> float:
        return float(np.max(np.abs(self.eigenvalues - self.predicted))) if len(self.labels) else 0.0

    @property
    def diagonal(self) -> bool:
        return self.max_offdiag < OP_TOL

    def as_dict(self) -> dict:
        return {
            "edge": self.edge,
            "diagonal": self.diagonal,
            "max_offdiag": self.max_offdiag,
            "max_formula_error": self.max_formula_error,
            "eigenvalues": [
                {"alpha": a, "g": g, "beta": b, "value": float(v.real)}
                for (a, g, b), v in zip(self.labels, self.eigenvalues)
            ],
        }


def edge_eigenvalue_formula(N: int, K: int, n: int, alpha: int, g: int, beta: int) -> complex:
    """``(1/K) * FT[l -> conj(omega_g(f(l)))](chi_{alpha - beta})``."""
    lam = np.arange(K)
    fn = np.exp(-2j * np.pi * g * ((n * lam) % N) / N)
    return complex(fourier_transform(fn, K)[(alpha - beta) % K] / K)


def diagonalize_edge_op(model, j: int) -> EdgeSpectrum:
    """Conjugate ``D_j`` by the character basis of its three sites.

    Raises :class:`ConsistencyError` if the result is not diagonal.
    """
    model = as_model(model)
    spec = model.spec
    if spec.family is not Family.DUAL:
        raise ValueError("the edge transport term belongs to the dual family")
    layout = model.layout
    D = model.ops.E[j]
    p1, p2 = model.lattice.edge_faces(j, swap=spec.swap)
    roles = {layout.site("face", p1): "alpha", layout.site("edge", j): "g", layout.site("face", p2): "beta"}
    sites = tuple(sorted(roles))
    U = character_basis(layout, sites).contract().on(sites).toarray()
    M = U.conj().T @ D.on(sites).toarray() @ U
    off = M - np.diag(np.diag(M))
    max_off = float(np.max(np.abs(off)))
    if max_off > OP_TOL:
        raise ConsistencyError(f"edge term not diagonal in the character basis (off-diagonal {max_off:.3g})")
    dims = [layout.dims[s] for s in sites]
    labels, predicted = [], []
    for digits in np.ndindex(*dims):
        lab = dict(zip((roles[s] for s in sites), digits))
        labels.append((lab["alpha"], lab["g"], lab["beta"]))
        predicted.append(edge_eigenvalue_formula(spec.N, spec.K, spec.n, lab["alpha"], lab["g"], lab["beta"]))
    return EdgeSpectrum(j, labels, np.diag(M).copy(), np.asarray(predicted), max_off)


def fake_holonomy(model, p: int, state) -> GroupElement:
    """Face word of face ``p`` on a basis state (digit sequence or index)."""
    spec = _spec_of(model)
    layout = _layout_of(model)
    lat = spec.lattice
    lat._check(p, lat.n_faces, "face")
    digits = np.asarray(state, dtype=np.int64)
    if digits.ndim == 0:
        digits = layout.digits(int(digits))
    if digits.shape != (layout.n_sites,):
        raise ValueError("basis state has the wrong number of sites")
    r, s, t, u = (digits[layout.site("edge", e)] for e in lat.face_boundary(p).edges)
    gamma = digits[layout.site("face", p)] if spec.family is Family.DUAL else 0
    return spec.gauge(int(face_word(spec, r, s, t, u, gamma)))


# ---------------------------------------------------------------------------------
# dense checks
# ---------------------------------------------------------------------------------


def dense_spectrum(model) -> np.ndarray:
    """All eigenvalues of ``H`` (ascending); only for dimension <= 4096."""
    model = as_model(model)
    if model.spec.dim > DENSE_LIMIT:
        raise CapExceeded(f"dense diagonalization refused above dimension {DENSE_LIMIT}")
    H = model.hamiltonian.to_dense()
    if np.abs(H.imag).max(initial=0.0) < 1e-14:
        # real symmetric path is several times faster
        H = H.real
    return scipy.linalg.eigvalsh(H)


def ground_multiplicity(eigenvalues, e0: float, tol: float = 1e-8) -> int:
    return int(np.sum(np.abs(np.asarray(eigenvalues) - e0) < tol))
