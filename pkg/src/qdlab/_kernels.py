"""Hot loops on sparse state vectors.

A sparse state is a pair ``(idx, amp)`` of sorted int64 basis indices and
complex128 amplitudes. Local operators are passed as :class:`PackedOps`, a
flat encoding of a sequence of operators, each given by the strides/dims of
the sites it touches and a CSC matrix on its local space.

Two interchangeable implementations live here: ``numba`` loops compiled with
``@njit`` and a ``numpy`` path that processes many basis vectors at once.
Set ``QDLAB_DISABLE_NUMBA=1`` to force the numpy path.
"""

from __future__ import annotations

import os
from typing import NamedTuple

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency, kept soft for portability
    numba = None

DROP_TOL = 1e-15


def numba_enabled() -> bool:
    flag = os.environ.get("QDLAB_DISABLE_NUMBA", "").strip().lower()
    return numba is not None and flag not in ("1", "true", "yes", "on")


class PackedOps(NamedTuple):
    site_ptr: np.ndarray
    strides: np.ndarray
    dims: np.ndarray
    lstrides: np.ndarray
    off_ptr: np.ndarray
    offsets: np.ndarray
    ip_ptr: np.ndarray
    indptr: np.ndarray
    nz_ptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @property
    def count(self) -> int:
        return len(self.site_ptr) - 1


def pack(local_ops) -> PackedOps:
    """Flatten ``[(full_strides, site_dims, csc_matrix), ...]``."""
    site_ptr, off_ptr, ip_ptr, nz_ptr = [0], [0], [0], [0]
    strides, dims, lstrides, offsets, indptr, indices, data = [], [], [], [], [], [], []
    for st, dm, mat in local_ops:
        st = np.asarray(st, dtype=np.int64)
        dm = np.asarray(dm, dtype=np.int64)
        dloc = int(np.prod(dm)) if len(dm) else 1
        ls = np.ones(len(dm), dtype=np.int64)
        for k in range(len(dm) - 2, -1, -1):
            ls[k] = ls[k + 1] * dm[k + 1]
        digits = (np.arange(dloc)[:, None] // ls[None, :]) % dm[None, :] if len(dm) else np.zeros((1, 0), np.int64)
        off = (digits * st[None, :]).sum(axis=1).astype(np.int64)
        mat = mat.tocsc()
        mat.sort_indices()
        strides.append(st)
        dims.append(dm)
        lstrides.append(ls)
        offsets.append(off)
        indptr.append(mat.indptr.astype(np.int64))
        indices.append(mat.indices.astype(np.int64))
        data.append(mat.data.astype(np.complex128))
        site_ptr.append(site_ptr[-1] + len(dm))
        off_ptr.append(off_ptr[-1] + dloc)
        ip_ptr.append(ip_ptr[-1] + dloc + 1)
        nz_ptr.append(nz_ptr[-1] + mat.nnz)

    def cat(xs, dtype):
        return np.concatenate(xs).astype(dtype) if xs else np.zeros(0, dtype)

    return PackedOps(
        np.asarray(site_ptr, np.int64),
        cat(strides, np.int64),
        cat(dims, np.int64),
        cat(lstrides, np.int64),
        np.asarray(off_ptr, np.int64),
        cat(offsets, np.int64),
        np.asarray(ip_ptr, np.int64),
        cat(indptr, np.int64),
        np.asarray(nz_ptr, np.int64),
        cat(indices, np.int64),
        cat(data, np.complex128),
    )


# ---------------------------------------------------------------------------------
# numpy implementation (batched over columns)
# ---------------------------------------------------------------------------------


def _np_local_index(idx, P: PackedOps, i):
    s0, s1 = P.site_ptr[i], P.site_ptr[i + 1]
    loc = np.zeros(len(idx), dtype=np.int64)
    for k in range(s0, s1):
        loc += ((idx // P.strides[k]) % P.dims[k]) * P.lstrides[k]
    return loc


def _np_apply_one(col, idx, amp, P: PackedOps, i, dim):
    loc = _np_local_index(idx, P, i)
    ip = P.indptr[P.ip_ptr[i]: P.ip_ptr[i + 1]]
    off = P.offsets[P.off_ptr[i]: P.off_ptr[i + 1]]
    rows = P.indices[P.nz_ptr[i]: P.nz_ptr[i + 1]]
    vals = P.data[P.nz_ptr[i]: P.nz_ptr[i + 1]]
    start, counts = ip[loc], ip[loc + 1] - ip[loc]
    rep = np.repeat(np.arange(len(idx)), counts)
    within = np.arange(len(rep)) - np.repeat(np.cumsum(counts) - counts, counts)
    q = start[rep] + within
    new_idx = idx[rep] - off[loc[rep]] + off[rows[q]]
    new_amp = amp[rep] * vals[q]
    return _np_merge(col[rep], new_idx, new_amp, dim)


def _np_merge(col, idx, amp, dim):
    if len(idx) == 0:
        return col, idx, amp
    key = col * dim + idx
    uniq, inv = np.unique(key, return_inverse=True)
    re = np.bincount(inv, weights=amp.real, minlength=len(uniq))
    im = np.bincount(inv, weights=amp.imag, minlength=len(uniq))
    out = re + 1j * im
    keep = np.abs(out) > DROP_TOL
    uniq = uniq[keep]
    return uniq // dim, uniq % dim, out[keep]


def apply_sparse_numpy(idx, amp, P: PackedOps, dim):
    col = np.zeros(len(idx), dtype=np.int64)
    for i in range(P.count):
        col, idx, amp = _np_apply_one(col, idx, amp, P, i, dim)
    return idx, amp


def diagonal_weights_numpy(dim, P: PackedOps, chunk=1 << 20):
    """Indices ``x`` and values ``prod_i diag_i(x)`` where the product is non-zero."""
    xs_out, ws_out = [], []
    diags = []
    for i in range(P.count):
        ip = P.indptr[P.ip_ptr[i]: P.ip_ptr[i + 1]]
        rows = P.indices[P.nz_ptr[i]: P.nz_ptr[i + 1]]
        vals = P.data[P.nz_ptr[i]: P.nz_ptr[i + 1]]
        d = np.zeros(len(ip) - 1, dtype=np.complex128)
        for c in range(len(ip) - 1):
            for q in range(ip[c], ip[c + 1]):
                if rows[q] == c:
                    d[c] += vals[q]
        diags.append(d)
    for lo in range(0, dim, chunk):
        x = np.arange(lo, min(dim, lo + chunk), dtype=np.int64)
        w = np.ones(len(x), dtype=np.complex128)
        for i in range(P.count):
            w *= diags[i][_np_local_index(x, P, i)]
        nz = np.abs(w) > DROP_TOL
        xs_out.append(x[nz])
        ws_out.append(w[nz])
    return np.concatenate(xs_out), np.concatenate(ws_out)


def trace_sweep_numpy(xs, ws, left: PackedOps, right: PackedOps, dim, batch=256):
    """Per-column values ``ws[t] * <left e_x | right e_x>`` for ``x = xs[t]``."""
    result = np.zeros(len(xs), dtype=np.complex128)
    for lo in range(0, len(xs), batch):
        x = xs[lo: lo + batch].astype(np.int64)
        cols = np.arange(len(x), dtype=np.int64)
        ones = np.ones(len(x), dtype=np.complex128)
        lc, li, la = cols, x, ones
        for i in range(left.count):
            lc, li, la = _np_apply_one(lc, li, la, left, i, dim)
        rc, ri, ra = cols, x, ones
        for i in range(right.count):
            rc, ri, ra = _np_apply_one(rc, ri, ra, right, i, dim)
        _, il, ir = np.intersect1d(lc * dim + li, rc * dim + ri, assume_unique=True, return_indices=True)
        prod = np.conj(la[il]) * ra[ir]
        acc = np.bincount(lc[il], weights=prod.real, minlength=len(x)) + 1j * np.bincount(
            lc[il], weights=prod.imag, minlength=len(x)
        )
        result[lo: lo + len(x)] = ws[lo: lo + len(x)] * acc
    return result


# ---------------------------------------------------------------------------------
# numba implementation (one column at a time)
# ---------------------------------------------------------------------------------

if numba is not None:
    _jit = numba.njit(cache=True, nogil=True)

    @_jit
    def _nb_merge(idx, amp):
        n = len(idx)
        if n == 0:
            return idx, amp
        order = np.argsort(idx, kind="mergesort")
        out_idx = np.empty(n, dtype=np.int64)
        out_amp = np.empty(n, dtype=np.complex128)
        w = -1
        last = -1
        for t in range(n):
            k = idx[order[t]]
            if w >= 0 and k == last:
                out_amp[w] += amp[order[t]]
            else:
                w += 1
                out_idx[w] = k
                out_amp[w] = amp[order[t]]
                last = k
        m = 0
        for t in range(w + 1):
            if abs(out_amp[t]) > DROP_TOL:
                out_idx[m] = out_idx[t]
                out_amp[m] = out_amp[t]
                m += 1
        return out_idx[:m], out_amp[:m]

    @_jit
    def _nb_apply_one(idx, amp, i, site_ptr, strides, dims, lstrides, off_ptr, offsets,
                      ip_ptr, indptr, nz_ptr, indices, data):
        s0, s1 = site_ptr[i], site_ptr[i + 1]
        o0, p0, z0 = off_ptr[i], ip_ptr[i], nz_ptr[i]
        m = len(idx)
        locs = np.empty(m, dtype=np.int64)
        total = 0
        for t in range(m):
            loc = 0
            for k in range(s0, s1):
                loc += ((idx[t] // strides[k]) % dims[k]) * lstrides[k]
            locs[t] = loc
            total += indptr[p0 + loc + 1] - indptr[p0 + loc]
        out_idx = np.empty(total, dtype=np.int64)
        out_amp = np.empty(total, dtype=np.complex128)
        w = 0
        for t in range(m):
            loc = locs[t]
            base = idx[t] - offsets[o0 + loc]
            for q in range(indptr[p0 + loc], indptr[p0 + loc + 1]):
                out_idx[w] = base + offsets[o0 + indices[z0 + q]]
                out_amp[w] = amp[t] * data[z0 + q]
                w += 1
        return _nb_merge(out_idx, out_amp)

    @_jit
    def _nb_apply_all(idx, amp, site_ptr, strides, dims, lstrides, off_ptr, offsets,
                      ip_ptr, indptr, nz_ptr, indices, data):
        for i in range(len(site_ptr) - 1):
            idx, amp = _nb_apply_one(idx, amp, i, site_ptr, strides, dims, lstrides, off_ptr,
                                     offsets, ip_ptr, indptr, nz_ptr, indices, data)
        return idx, amp

    @_jit
    def _nb_diagonal_weights(dim, site_ptr, strides, dims, lstrides, off_ptr, offsets,
                             ip_ptr, indptr, nz_ptr, indices, data):
        nops = len(site_ptr) - 1
        diag = np.zeros(len(offsets), dtype=np.complex128)
        for i in range(nops):
            o0, p0, z0 = off_ptr[i], ip_ptr[i], nz_ptr[i]
            for c in range(off_ptr[i + 1] - o0):
                for q in range(indptr[p0 + c], indptr[p0 + c + 1]):
                    if indices[z0 + q] == c:
                        diag[o0 + c] += data[z0 + q]
        xs = np.empty(dim, dtype=np.int64)
        ws = np.empty(dim, dtype=np.complex128)
        m = 0
        for x in range(dim):
            w = 1.0 + 0.0j
            for i in range(nops):
                loc = 0
                for k in range(site_ptr[i], site_ptr[i + 1]):
                    loc += ((x // strides[k]) % dims[k]) * lstrides[k]
                w *= diag[off_ptr[i] + loc]
                if w == 0:
                    break
            if abs(w) > DROP_TOL:
                xs[m] = x
                ws[m] = w
                m += 1
        return xs[:m], ws[:m]

    @_jit
    def _nb_trace_sweep(xs, ws,
                        l_site_ptr, l_strides, l_dims, l_lstrides, l_off_ptr, l_offsets,
                        l_ip_ptr, l_indptr, l_nz_ptr, l_indices, l_data,
                        r_site_ptr, r_strides, r_dims, r_lstrides, r_off_ptr, r_offsets,
                        r_ip_ptr, r_indptr, r_nz_ptr, r_indices, r_data):
        out = np.zeros(len(xs), dtype=np.complex128)
        for t in range(len(xs)):
            seed_i = np.empty(1, dtype=np.int64)
            seed_i[0] = xs[t]
            seed_a = np.ones(1, dtype=np.complex128)
            li, la = _nb_apply_all(seed_i, seed_a, l_site_ptr, l_strides, l_dims, l_lstrides,
                                   l_off_ptr, l_offsets, l_ip_ptr, l_indptr, l_nz_ptr,
                                   l_indices, l_data)
            ri, ra = _nb_apply_all(seed_i, seed_a, r_site_ptr, r_strides, r_dims, r_lstrides,
                                   r_off_ptr, r_offsets, r_ip_ptr, r_indptr, r_nz_ptr,
                                   r_indices, r_data)
            acc = 0.0j
            a = 0
            b = 0
            while a < len(li) and b < len(ri):
                if li[a] == ri[b]:
                    acc += np.conj(la[a]) * ra[b]
                    a += 1
                    b += 1
                elif li[a] < ri[b]:
                    a += 1
                else:
                    b += 1
            out[t] = ws[t] * acc
        return out


def apply_sparse_numba(idx, amp, P: PackedOps, dim=None):
    return _nb_apply_all(np.asarray(idx, np.int64), np.asarray(amp, np.complex128), *P)


def diagonal_weights_numba(dim, P: PackedOps):
    return _nb_diagonal_weights(int(dim), *P)


def trace_sweep_numba(xs, ws, left: PackedOps, right: PackedOps, dim=None):
    return _nb_trace_sweep(np.asarray(xs, np.int64), np.asarray(ws, np.complex128), *left, *right)


# ---------------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------------


def apply_sparse(idx, amp, P: PackedOps, dim: int):
    if P.count == 0:
        return np.asarray(idx, np.int64), np.asarray(amp, np.complex128)
    if numba_enabled():
        return apply_sparse_numba(idx, amp, P, dim)
    return apply_sparse_numpy(np.asarray(idx, np.int64), np.asarray(amp, np.complex128), P, dim)


def diagonal_weights(dim: int, P: PackedOps):
    if P.count == 0:
        return np.arange(dim, dtype=np.int64), np.ones(dim, dtype=np.complex128)
    if numba_enabled():
        return diagonal_weights_numba(dim, P)
    return diagonal_weights_numpy(dim, P)


def trace_sweep(xs, ws, left: PackedOps, right: PackedOps, dim: int):
    if numba_enabled():
        return trace_sweep_numba(xs, ws, left, right, dim)
    return trace_sweep_numpy(np.asarray(xs, np.int64), np.asarray(ws, np.complex128), left, right, dim)
