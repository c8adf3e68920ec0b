"""Tensor-product state spaces, local sparse operators and sparse state vectors.

Every operator is stored on its support only: a :class:`LinearOp` is a sorted
tuple of site indices plus a sparse matrix on the tensor product of those
sites (row-major in site order). Acting on the full space is done
matrix-free, either on dense vectors (``numpy.tensordot``-style axis
contraction) or on :class:`StateVector` objects, which keep only non-zero
amplitudes and go through the compiled kernels in :mod:`qdlab._kernels`.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .groups import character_table

__all__ = [
    "SiteLayout",
    "LinearOp",
    "OpSum",
    "OpProduct",
    "StateVector",
    "clock_shift",
    "embed",
    "identity",
    "apply",
    "expectation",
    "commutator_norm",
    "character_basis",
    "DENSE_LIMIT",
    "OP_TOL",
    "NORM_TOL",
]

DENSE_LIMIT = 4096
OP_TOL = 1e-10
NORM_TOL = 1e-12


# ---------------------------------------------------------------------------------
# layout
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class SiteLayout:
    """Ordered list of sites with their local dimensions.

    ``labels[s]`` is ``(kind, index)`` with kind one of ``"edge"``, ``"face"``,
    ``"vertex"``; the full basis index is row-major in site order.
    """

    dims: tuple[int, ...]
    labels: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise ValueError("local dimensions must be positive")
        object.__setattr__(self, "dims", dims)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(("site", s) for s in range(len(dims))))
        if len(self.labels) != len(dims):
            raise ValueError("one label per site required")

    @classmethod
    def for_lattice(cls, lattice, gauge: int, faces: int | None = None, vertices: int | None = None):
        """Edges (dimension ``gauge``), then faces, then vertices if requested."""
        dims, labels = [], []
        for j in range(lattice.n_edges):
            dims.append(gauge)
            labels.append(("edge", j))
        if faces is not None:
            for p in range(lattice.n_faces):
                dims.append(faces)
                labels.append(("face", p))
        if vertices is not None:
            for v in range(lattice.n_vertices):
                dims.append(vertices)
                labels.append(("vertex", v))
        return cls(tuple(dims), tuple(labels))

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @cached_property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=object))

    @cached_property
    def strides(self) -> np.ndarray:
        st = np.ones(self.n_sites, dtype=np.int64)
        for s in range(self.n_sites - 2, -1, -1):
            st[s] = st[s + 1] * self.dims[s + 1]
        return st

    @cached_property
    def _index(self) -> dict:
        return {lab: s for s, lab in enumerate(self.labels)}

    def site(self, kind: str, i: int) -> int:
        try:
            return self._index[(kind, i)]
        except KeyError:
            raise IndexError(f"layout has no {kind} {i}") from None

    def sites_of(self, kind: str) -> list[int]:
        return [s for s, (k, _) in enumerate(self.labels) if k == kind]

    def index(self, digits: Sequence[int]) -> int:
        digits = np.asarray(digits, dtype=np.int64)
        if digits.shape != (self.n_sites,) or np.any(digits < 0) or np.any(digits >= self.dims):
            raise ValueError("basis state digits out of range")
        return int(digits @ self.strides)

    def digits(self, index) -> np.ndarray:
        index = np.asarray(index, dtype=np.int64)
        return (index[..., None] // self.strides) % np.asarray(self.dims)


def _local_strides(dims: Sequence[int]) -> np.ndarray:
    ls = np.ones(len(dims), dtype=np.int64)
    for k in range(len(dims) - 2, -1, -1):
        ls[k] = ls[k + 1] * dims[k + 1]
    return ls


def _local_digits(dims: Sequence[int]) -> np.ndarray:
    """All local basis states as digit rows, shape ``(prod(dims), len(dims))``."""
    d = int(np.prod(dims)) if len(dims) else 1
    if not len(dims):
        return np.zeros((1, 0), dtype=np.int64)
    return (np.arange(d)[:, None] // _local_strides(dims)[None, :]) % np.asarray(dims)[None, :]


def _lift(mat, src: Sequence[int], dst: Sequence[int], layout: SiteLayout):
    """Re-express a matrix on sites ``src`` as one on ``dst`` (a superset, any order)."""
    src, dst = list(src), list(dst)
    if src == dst:
        return sp.csr_array(mat)
    dst_dims = [layout.dims[s] for s in dst]
    dst_ls = _local_strides(dst_dims)
    pos = [dst.index(s) for s in src]
    rest = [k for k, s in enumerate(dst) if s not in src]
    coo = sp.coo_array(mat)
    src_digits_r = _local_digits([layout.dims[s] for s in src])
    src_weight = src_digits_r @ dst_ls[pos] if pos else np.zeros(coo.shape[0], np.int64)
    rest_weight = _local_digits([dst_dims[k] for k in rest]) @ dst_ls[rest] if rest else np.zeros(1, np.int64)
    rows = (src_weight[coo.row][:, None] + rest_weight[None, :]).ravel()
    cols = (src_weight[coo.col][:, None] + rest_weight[None, :]).ravel()
    vals = np.repeat(coo.data, len(rest_weight))
    D = int(np.prod(dst_dims))
    return sp.csr_array((vals, (rows, cols)), shape=(D, D))


# ---------------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------------


class LinearOp:
    """A sparse operator acting on a few sites of a :class:`SiteLayout`."""

    __array_priority__ = 100

    def __init__(self, layout: SiteLayout, sites: Iterable[int], matrix, name: str = ""):
        sites = tuple(int(s) for s in sites)
        if len(set(sites)) != len(sites):
            raise ValueError("repeated site in operator support")
        for s in sites:
            if not 0 <= s < layout.n_sites:
                raise IndexError(f"site {s} outside layout")
        dloc = int(np.prod([layout.dims[s] for s in sites])) if sites else 1
        matrix = sp.csr_array(matrix, dtype=np.complex128)
        if matrix.shape != (dloc, dloc):
            raise ValueError(
                f"dimension mismatch: matrix {matrix.shape} on sites with local dimension {dloc}"
            )
        order = tuple(sorted(sites))
        if order != sites:
            matrix = _lift(matrix, sites, order, layout)
        matrix.eliminate_zeros()
        self.layout = layout
        self.sites = order
        self.matrix = matrix
        self.name = name

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<LinearOp{label} on sites {self.sites}, nnz={self.matrix.nnz}>"

    # -- construction helpers -----------------------------------------------------------

    @classmethod
    def from_map(cls, layout, sites, fn, coeff=1.0, name=""):
        """Monomial operator ``|fn(x)><x|`` (times ``coeff(x)`` if callable).

        ``fn`` receives digit rows of shape ``(d, len(sites))`` and returns new rows.
        """
        sites = tuple(sites)
        dims = [layout.dims[s] for s in sites]
        digits = _local_digits(dims)
        new = np.asarray(fn(digits.copy()), dtype=np.int64) % np.asarray(dims)
        ls = _local_strides(dims)
        rows, cols = new @ ls, digits @ ls
        vals = coeff(digits) if callable(coeff) else np.full(len(cols), coeff, dtype=complex)
        d = len(cols)
        return cls(layout, sites, sp.csr_array((vals, (rows, cols)), shape=(d, d)), name)

    @classmethod
    def diagonal(cls, layout, sites, fn, name=""):
        """Diagonal operator with entries ``fn(digit_rows)``."""
        sites = tuple(sites)
        digits = _local_digits([layout.dims[s] for s in sites])
        return cls(layout, sites, sp.diags_array(np.asarray(fn(digits), dtype=complex)), name)

    # -- algebra ------------------------------------------------------------------------

    @property
    def local_dim(self) -> int:
        return self.matrix.shape[0]

    def on(self, sites: Sequence[int]):
        """Matrix of this operator on a larger ordered support."""
        return _lift(self.matrix, self.sites, tuple(sites), self.layout)

    def _union(self, other: LinearOp):
        if other.layout != self.layout:
            raise ValueError("operators live on different layouts")
        return tuple(sorted(set(self.sites) | set(other.sites)))

    def __matmul__(self, other):
        if isinstance(other, LinearOp):
            u = self._union(other)
            return LinearOp(self.layout, u, self.on(u) @ other.on(u))
        if isinstance(other, (StateVector, np.ndarray)):
            return self.apply(other)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, LinearOp):
            u = self._union(other)
            return LinearOp(self.layout, u, self.on(u) + other.on(u))
        if np.isscalar(other):
            return self + other * identity(self.layout, self.sites)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return LinearOp(self.layout, self.sites, -self.matrix, self.name)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if np.isscalar(c):
            return LinearOp(self.layout, self.sites, c * self.matrix, self.name)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = identity(self.layout, self.sites)
        for _ in range(k):
            out = out @ self
        return out

    def adjoint(self) -> LinearOp:
        return LinearOp(self.layout, self.sites, self.matrix.conj().T, self.name + "†" if self.name else "")

    @property
    def H(self) -> LinearOp:
        return self.adjoint()

    def scale(self, c) -> LinearOp:
        return self * c

    def compose(self, other: LinearOp) -> LinearOp:
        return self @ other

    # -- checks -------------------------------------------------------------------------

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix.data))) if self.matrix.nnz else 0.0

    def projector_defect(self) -> float:
        """``max |P^2 - P|`` over entries."""
        m = self.matrix
        d = (m @ m - m).tocsr()
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0

    def hermiticity_defect(self) -> float:
        d = (self.matrix - self.matrix.conj().T).tocsr()
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0

    def is_projector(self, tol: float = OP_TOL) -> bool:
        return self.projector_defect() < tol and self.hermiticity_defect() < tol

    def is_diagonal(self) -> bool:
        coo = self.matrix.tocoo()
        return bool(np.all(coo.row == coo.col))

    def allclose(self, other: LinearOp, tol: float = OP_TOL) -> bool:
        return (self - other).max_abs() < tol

    # -- full space -----------------------------------------------------------------------

    @property
    def nnz(self) -> int:
        """Non-zeros of the full-space matrix."""
        return self.matrix.nnz * (self.layout.dim // self.local_dim)

    def to_sparse(self):
        return self.on(range(self.layout.n_sites))

    def to_dense(self) -> np.ndarray:
        if self.layout.dim > DENSE_LIMIT:
            raise ValueError(f"dense form refused above dimension {DENSE_LIMIT}")
        return self.to_sparse().toarray()

    @cached_property
    def packed(self) -> _kernels.PackedOps:
        return _pack_ops([self])

    def apply(self, psi):
        if isinstance(psi, StateVector):
            if psi.layout != self.layout:
                raise ValueError("dimension mismatch: state and operator layouts differ")
            idx, amp = _kernels.apply_sparse(psi.idx, psi.amp, self.packed, self.layout.dim)
            return StateVector(self.layout, idx, amp)
        return _apply_dense(self, np.asarray(psi))


def _pack_ops(ops: Sequence[LinearOp]) -> _kernels.PackedOps:
    """Pack operators in application order (first entry acts first)."""
    return _kernels.pack(
        [(op.layout.strides[list(op.sites)], [op.layout.dims[s] for s in op.sites], op.matrix) for op in ops]
    )


def _apply_dense(op: LinearOp, psi: np.ndarray) -> np.ndarray:
    layout = op.layout
    if psi.shape[0] != layout.dim:
        raise ValueError(f"dimension mismatch: vector of length {psi.shape[0]}, space {layout.dim}")
    batch = psi.shape[1:]
    t = psi.reshape(layout.dims + batch)
    k = len(op.sites)
    t = np.moveaxis(t, op.sites, range(k))
    shape = t.shape
    out = op.matrix @ t.reshape(op.local_dim, -1)
    out = np.moveaxis(np.asarray(out).reshape(shape), range(k), op.sites)
    return out.reshape(psi.shape)


def identity(layout: SiteLayout, sites: Sequence[int] = ()) -> LinearOp:
    d = int(np.prod([layout.dims[s] for s in sites])) if sites else 1
    return LinearOp(layout, sites, sp.eye_array(d, dtype=complex), "1")


class OpSum:
    """``sum_k coeff_k * op_k`` kept as a list; used for Hamiltonians."""

    def __init__(self, terms: Iterable[tuple[complex, LinearOp]], constant: complex = 0.0):
        self.terms = [(complex(c), op) for c, op in terms]
        if not self.terms:
            raise ValueError("empty operator sum")
        self.layout = self.terms[0][1].layout
        self.constant = complex(constant)

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        if isinstance(other, OpSum):
            return OpSum(self.terms + other.terms, self.constant + other.constant)
        if isinstance(other, LinearOp):
            return OpSum(self.terms + [(1.0, other)], self.constant)
        if np.isscalar(other):
            return OpSum(self.terms, self.constant + other)
        return NotImplemented

    def __mul__(self, c):
        return OpSum([(c * a, op) for a, op in self.terms], c * self.constant)

    __rmul__ = __mul__

    def adjoint(self) -> OpSum:
        return OpSum([(np.conj(c), op.adjoint()) for c, op in self.terms], np.conj(self.constant))

    def apply(self, psi):
        out = None
        for c, op in self.terms:
            v = op.apply(psi) * c
            out = v if out is None else out + v
        if self.constant:
            out = out + psi * self.constant
        return out

    def __matmul__(self, psi):
        return self.apply(psi)

    def to_sparse(self):
        m = sum(c * op.to_sparse() for c, op in self.terms)
        if self.constant:
            m = m + self.constant * sp.eye_array(self.layout.dim, dtype=complex)
        return sp.csr_array(m)

    def to_dense(self) -> np.ndarray:
        if self.layout.dim > DENSE_LIMIT:
            raise ValueError(f"dense form refused above dimension {DENSE_LIMIT}")
        return self.to_sparse().toarray()


class OpProduct:
    """Ordered product ``factors[0] @ factors[1] @ ...`` applied matrix-free."""

    def __init__(self, factors: Sequence[LinearOp]):
        self.factors = list(factors)
        if not self.factors:
            raise ValueError("empty operator product")
        self.layout = self.factors[0].layout

    def apply(self, psi):
        for op in reversed(self.factors):
            psi = op.apply(psi)
        return psi

    def __matmul__(self, psi):
        return self.apply(psi)

    def adjoint(self) -> OpProduct:
        return OpProduct([op.adjoint() for op in reversed(self.factors)])

    def contract(self) -> LinearOp:
        out = self.factors[0]
        for op in self.factors[1:]:
            out = out @ op
        return out

    def to_sparse(self):
        return self.contract().to_sparse()


Operator = Union[LinearOp, OpSum, OpProduct]


# ---------------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------------


@dataclass
class StateVector:
    """Sparse state: sorted basis indices with complex amplitudes."""

    layout: SiteLayout
    idx: np.ndarray
    amp: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.idx = np.asarray(self.idx, dtype=np.int64)
        self.amp = np.asarray(self.amp, dtype=np.complex128)
        if self.idx.shape != self.amp.shape:
            raise ValueError("index/amplitude length mismatch")
        if len(self.idx) > 1 and np.any(np.diff(self.idx) <= 0):
            order = np.argsort(self.idx, kind="stable")
            idx, amp = self.idx[order], self.amp[order]
            uniq, start = np.unique(idx, return_index=True)
            self.idx, self.amp = uniq, np.add.reduceat(amp, start)

    @classmethod
    def basis(cls, layout: SiteLayout, digits: Sequence[int]) -> StateVector:
        return cls(layout, [layout.index(digits)], [1.0])

    @classmethod
    def from_dense(cls, layout: SiteLayout, vec, tol: float = 0.0) -> StateVector:
        vec = np.asarray(vec, dtype=complex)
        nz = np.flatnonzero(np.abs(vec) > tol)
        return cls(layout, nz, vec[nz])

    @classmethod
    def zero(cls, layout: SiteLayout) -> StateVector:
        return cls(layout, np.zeros(0, np.int64), np.zeros(0, complex))

    def __len__(self):
        return len(self.idx)

    @property
    def nnz(self) -> int:
        return len(self.idx)

    def to_dense(self) -> np.ndarray:
        if self.layout.dim > 1 << 26:
            raise ValueError("state too large to densify")
        out = np.zeros(self.layout.dim, dtype=complex)
        out[self.idx] = self.amp
        return out

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amp) ** 2)))

    def normalized(self) -> StateVector:
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.layout, self.idx, self.amp / n)

    def inner(self, other: StateVector) -> complex:
        """``<self|other>``."""
        _, a, b = np.intersect1d(self.idx, other.idx, assume_unique=True, return_indices=True)
        return complex(np.sum(np.conj(self.amp[a]) * other.amp[b]))

    def __add__(self, other):
        if isinstance(other, StateVector):
            return StateVector(self.layout, np.concatenate([self.idx, other.idx]),
                               np.concatenate([self.amp, other.amp]))._pruned()
        return NotImplemented

    def __sub__(self, other):
        return self + other * -1.0

    def __mul__(self, c):
        return StateVector(self.layout, self.idx, self.amp * c)

    __rmul__ = __mul__

    def _pruned(self, tol: float = 1e-15) -> StateVector:
        keep = np.abs(self.amp) > tol
        return StateVector(self.layout, self.idx[keep], self.amp[keep])

    def amplitude(self, digits: Sequence[int]) -> complex:
        i = self.layout.index(digits)
        k = np.searchsorted(self.idx, i)
        return complex(self.amp[k]) if k < len(self.idx) and self.idx[k] == i else 0.0


# ---------------------------------------------------------------------------------
# functions
# ---------------------------------------------------------------------------------


def clock_shift(N: int) -> tuple[LinearOp, LinearOp]:
    """Shift ``X|h> = |h+1>`` and clock ``Z|h> = w^h |h>`` with ``w = exp(2 pi i/N)``."""
    if N < 1:
        raise ValueError("local dimension must be positive")
    layout = SiteLayout((N,), (("site", 0),))
    h = np.arange(N)
    X = sp.csr_array((np.ones(N, complex), ((h + 1) % N, h)), shape=(N, N))
    Z = sp.diags_array(np.exp(2j * np.pi * h / N))
    return LinearOp(layout, (0,), X, "X"), LinearOp(layout, (0,), Z, "Z")


def embed(op: LinearOp, site: int, layout: SiteLayout) -> LinearOp:
    """Place a single-site operator on ``site`` of ``layout``."""
    if op.local_dim != layout.dims[site]:
        raise ValueError(
            f"dimension mismatch: operator of dimension {op.local_dim} on site of dimension {layout.dims[site]}"
        )
    return LinearOp(layout, (site,), op.matrix, op.name)


def apply(op: Operator, psi):
    return op.apply(psi)


def expectation(op: Operator, psi) -> complex:
    phi = op.apply(psi)
    if isinstance(psi, StateVector):
        return psi.inner(phi)
    return complex(np.vdot(psi, phi))


def _full_sparse(A):
    if isinstance(A, LinearOp):
        return A.to_sparse()
    return A.to_sparse()


def commutator_norm(A: Operator, B: Operator) -> float:
    """Largest absolute entry of ``AB - BA``.

    For two :class:`LinearOp` the commutator is evaluated on the union of the
    supports (the identity elsewhere does not change the largest entry);
    disjoint supports commute exactly. Other operator types fall back to the
    full sparse matrices.
    """
    if isinstance(A, LinearOp) and isinstance(B, LinearOp):
        if not set(A.sites) & set(B.sites):
            return 0.0
        u = A._union(B)
        a, b = A.on(u), B.on(u)
        c = (a @ b - b @ a).tocsr()
    else:
        if A.layout.dim > 1 << 16:
            raise ValueError("full-space commutator refused for large spaces")
        a, b = _full_sparse(A), _full_sparse(B)
        c = sp.csr_array(a @ b - b @ a)
    return float(np.max(np.abs(c.data))) if c.nnz else 0.0


def _site_fourier(d: int, conjugate: bool) -> np.ndarray:
    """Columns are the character-basis vectors ``(1/sqrt d) sum_x chi_k(x)|x>``."""
    F = character_table(d) / np.sqrt(d)
    return F.conj() if conjugate else F


def character_basis(layout: SiteLayout, sites: Sequence[int] | None = None) -> OpProduct:
    """Unitary whose columns are character-basis product states.

    Edge sites use ``|g'> = (1/sqrt N) sum_g w_{g'}(g)|g>``; matter sites use
    the conjugate characters. The normalization is ``1/sqrt(dim)`` per site.
    """
    if sites is None:
        sites = range(layout.n_sites)
    factors = []
    for s in sites:
        kind = layout.labels[s][0]
        F = _site_fourier(layout.dims[s], conjugate=(kind != "edge"))
        factors.append(LinearOp(layout, (s,), F, f"F[{s}]"))
    return OpProduct(factors)
