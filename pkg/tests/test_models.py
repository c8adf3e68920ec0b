import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from oracles import DenseModel
from qdlab.groups import enumerate_homomorphisms
from qdlab.hilbert import LinearOp, clock_shift, commutator_norm
from qdlab.models import (
    Family,
    Model,
    ModelSpec,
    ThetaAction,
    build_DM_ops,
    build_edge_op_dual,
    build_face_op,
    build_hamiltonian,
    build_projector_family,
    build_total_hamiltonian,
    build_vertex_op,
    solvability_check,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def kron(*ms):
    out = np.eye(1, dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def local(spec, layout, roles, matrix):
    """LinearOp from a matrix written in an explicit role order of sites."""
    return LinearOp(layout, roles, matrix)


def star_sites(model, v):
    return [model.layout.site("edge", e) for e in model.lattice.vertex_star(v).edges]


def face_roles(model, p):
    return [model.layout.site("face", p)] + [model.layout.site("edge", e) for e in model.lattice.face_boundary(p).edges]


def edge_roles(model, j):
    p1, p2 = model.lattice.edge_faces(j, swap=model.spec.swap)
    lay = model.layout
    return [lay.site("face", p1), lay.site("edge", j), lay.site("face", p2)]


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError, match="not a homomorphism"):
            ModelSpec.dual(4, 2, 1)
        with pytest.raises(ValueError, match="degenerate lattice"):
            ModelSpec.dual(2, 2, 0, rows=1)
        with pytest.raises(ValueError):
            ModelSpec("bogus", 2)
        with pytest.raises(ValueError):
            ModelSpec(Family.DOUBLE, 2, K=2)
        with pytest.raises(ValueError, match="invalid theta"):
            ModelSpec.vertex(2, 3, "regular")

    def test_dimensions(self):
        assert ModelSpec.dual(2, 2, 1).dim == 4096
        assert ModelSpec.dual(3, 3, 1).dim == 3**12
        assert ModelSpec.vertex(2, 3).dim == 2**8 * 3**4
        assert ModelSpec.double(2).dim == 256
        assert ModelSpec.dual(2, 2, 1).n_terms == 16 and ModelSpec.double(2).n_terms == 8

    def test_multiplier_canonical(self):
        assert ModelSpec.dual(2, 2, 3).n == 1


class TestTheta:
    def test_block_matrix(self):
        th = ThetaAction.block_shift(3, 2, 1)
        assert th.M == 7 and th.is_action()
        shift = np.roll(np.eye(3), 1, axis=0)
        expected = sp.block_diag([shift, shift, np.eye(1)]).toarray()
        np.testing.assert_allclose(th.matrix(1), expected)
        np.testing.assert_allclose(th.matrix(0), np.eye(7))

    @pytest.mark.parametrize("text,kind", [("trivial", "trivial"), ("regular", "regular"), ("blocks:1,2", "blocks")])
    def test_parse(self, text, kind):
        M = 3 if kind != "blocks" else 5
        th = ThetaAction.parse(text, 3, M)
        assert th.kind == kind and th.is_action()
        assert ThetaAction.parse(th.descriptor, 3, M) == th

    def test_bad_descriptor(self):
        with pytest.raises(ValueError):
            ThetaAction.parse("blocks:1", 3, 3)
        with pytest.raises(ValueError):
            ThetaAction(3, 4, "blocks", 1, 0)


class TestAgainstDenseOracle:
    @pytest.mark.parametrize("N,K,n", [(2, 2, 1), (2, 2, 0), (3, 1, 0), (2, 3, 0), (4, 2, 2)])
    def test_terms_match(self, N, K, n):
        spec = ModelSpec.dual(N, K, n)
        model = Model(spec)
        ref = DenseModel(N, K, n)
        A, B, E = ref.terms()
        for ours, theirs in zip(model.ops.A + model.ops.B + model.ops.E, A + B + E):
            assert abs(ours.to_sparse() - theirs).max() < 1e-12

    def test_plain_double(self):
        model = Model(ModelSpec.double(3))
        ref = DenseModel(3, 1, 0, with_faces=False)
        A, B, _ = ref.terms()
        for ours, theirs in zip(model.ops.A + model.ops.B, A + B):
            assert abs(ours.to_sparse() - theirs).max() < 1e-12


class TestDisplayedOperators:
    """Local operators written out with Pauli matrices for the Z_2 examples."""

    def test_trivial_coupling(self):
        m = Model(ModelSpec.dual(2, 2, 0))
        A = local(m.spec, m.layout, star_sites(m, 0), 0.5 * (kron(I2, I2, I2, I2) + kron(SX, SX, SX, SX)))
        assert m.ops.A[0].allclose(A)
        B = local(m.spec, m.layout, face_roles(m, 1), 0.5 * (kron(I2, I2, I2, I2, I2) + kron(I2, SZ, SZ, SZ, SZ)))
        assert m.ops.B[1].allclose(B)
        D = local(m.spec, m.layout, edge_roles(m, 3), 0.5 * (kron(I2, I2, I2) + kron(SX, I2, SX)))
        assert m.ops.E[3].allclose(D)

    def test_identity_coupling(self):
        m = Model(ModelSpec.dual(2, 2, 1))
        B = local(m.spec, m.layout, face_roles(m, 2), 0.5 * (kron(I2, I2, I2, I2, I2) + kron(SZ, SZ, SZ, SZ, SZ)))
        assert m.ops.B[2].allclose(B)
        D = local(m.spec, m.layout, edge_roles(m, 5), 0.5 * (kron(I2, I2, I2) + kron(SX, SX, SX)))
        assert m.ops.E[5].allclose(D)
        fam = build_projector_family(m.spec, "face", 2, m.layout)
        B2 = local(m.spec, m.layout, face_roles(m, 2), 0.5 * (kron(I2, I2, I2, I2, I2) - kron(SZ, SZ, SZ, SZ, SZ)))
        assert fam[1].allclose(B2)
        dfam = build_projector_family(m.spec, "edge", 5, m.layout)
        D2 = local(m.spec, m.layout, edge_roles(m, 5), 0.5 * (kron(I2, I2, I2) - kron(SX, SX, SX)))
        assert dfam[1].allclose(D2)


class TestCoprimeFamilies:
    """D^3(Z_2): the three families of the coprime example."""

    def setup_method(self):
        self.m = Model(ModelSpec.dual(2, 3, 0))
        X3, _ = clock_shift(3)
        self.X = X3.matrix.toarray()
        self.X2 = self.X @ self.X
        self.I3 = np.eye(3)

    def test_vertex_and_face_families(self):
        m = self.m
        afam = build_projector_family(m.spec, "vertex", 0, m.layout)
        for J, sgn in enumerate([1, -1]):
            ref = local(m.spec, m.layout, star_sites(m, 0), 0.5 * (kron(I2, I2, I2, I2) + sgn * kron(SX, SX, SX, SX)))
            assert afam[J].allclose(ref)
        bfam = build_projector_family(m.spec, "face", 0, m.layout)
        for J, sgn in enumerate([1, -1]):
            ref = local(m.spec, m.layout, face_roles(m, 0), 0.5 * (kron(self.I3, I2, I2, I2, I2) + sgn * kron(self.I3, SZ, SZ, SZ, SZ)))
            assert bfam[J].allclose(ref)

    def test_edge_family(self):
        m = self.m
        dfam = build_projector_family(m.spec, "edge", 2, m.layout)
        w = np.exp(2j * np.pi / 3)
        coeffs = []
        for J in range(3):
            c = w ** (-J)
            ref = (kron(self.I3, I2, self.I3) + c * kron(self.X, I2, self.X2) + np.conj(c) * kron(self.X2, I2, self.X)) / 3
            assert dfam[J].allclose(local(m.spec, m.layout, edge_roles(m, 2), ref))
            coeffs.append(c)
        # the three phases are the cube roots of unity, in conjugate pairs on X and X^2
        np.testing.assert_allclose(sorted(np.angle(coeffs)), sorted(np.angle([1, w, w**2])), atol=1e-12)

    def test_half_and_i_coefficients_are_not_projectors(self):
        X, X2, I3 = self.X, self.X2, self.I3
        for c in [1, 1j, -1j]:
            P = 0.5 * (kron(I3, I2, I3) + c * kron(X, I2, X2) + np.conj(c) * kron(X2, I2, X))
            assert np.abs(P @ P - P).max() > 0.1

    def test_families_complete_and_orthogonal(self):
        m = self.m
        for kind, site in [("vertex", 1), ("face", 3), ("edge", 6)]:
            fam = build_projector_family(m.spec, kind, site, m.layout)
            assert fam.completeness_defect() < 1e-10
            assert fam.orthogonality_defect() < 1e-10
            assert all(P.is_projector() for P in fam.members)


class TestProjectorFamilies:
    @pytest.mark.parametrize("N,K,n", [(2, 2, 1), (3, 3, 1), (4, 2, 2), (4, 4, 3)])
    def test_complete_orthogonal(self, N, K, n):
        spec = ModelSpec.dual(N, K, n)
        layout = spec.layout()
        for kind, site in [("vertex", 0), ("face", 1), ("edge", 2)]:
            fam = build_projector_family(spec, kind, site, layout)
            assert fam.completeness_defect() < 1e-10
            assert fam.orthogonality_defect() < 1e-10
        assert build_projector_family(spec, "vertex", 0, layout)[0].allclose(build_vertex_op(spec, 0, layout))
        assert build_projector_family(spec, "face", 1, layout)[0].allclose(build_face_op(spec, 1, layout))
        assert build_projector_family(spec, "edge", 2, layout)[0].allclose(build_edge_op_dual(spec, 2, layout))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            build_projector_family(ModelSpec.dual(2, 2, 1), "corner", 0)


class TestTerms:
    def test_vertex_projector_rank(self):
        spec = ModelSpec.dual(3, 1, 0)
        A = build_vertex_op(spec, 0)
        ev = np.linalg.eigvalsh(A.matrix.toarray())
        assert np.sum(np.abs(ev - 1) < 1e-10) == A.local_dim // 3
        assert np.all((np.abs(ev) < 1e-10) | (np.abs(ev - 1) < 1e-10))

    def test_face_diagonal(self):
        for spec in [ModelSpec.dual(3, 3, 1), ModelSpec.vertex(2, 2, "regular")]:
            assert build_face_op(spec, 0).is_diagonal()

    def test_kernel_matter_on_flat_face(self):
        spec = ModelSpec.dual(4, 4, 2)
        model = Model(spec)
        digits = np.zeros(model.layout.n_sites, dtype=int)
        digits[model.layout.site("face", 1)] = 2  # 2 is in ker f
        from qdlab.hilbert import StateVector

        sv = StateVector.basis(model.layout, digits)
        out = model.ops.B[1].apply(sv)
        assert out.nnz == 1 and abs(out.amp[0] - 1) < 1e-12

    def test_edge_term_refused_for_other_families(self):
        with pytest.raises(ValueError):
            build_edge_op_dual(ModelSpec.double(2), 0)


class TestVertexFamily:
    def test_single_level_matter_is_plain_double(self):
        vm = Model(ModelSpec.vertex(3, 1))
        dm = Model(ModelSpec.double(3))
        for a, b in zip(vm.ops.A + vm.ops.B, dm.ops.A + dm.ops.B):
            assert abs(a.to_sparse() - b.to_sparse()).max() < 1e-12
        for c in vm.ops.E:
            assert c.max_abs() == 1 and (c - 1.0).max_abs() < 1e-12

    def test_regular_comparator(self):
        spec = ModelSpec.vertex(2, 2, "regular")
        model = Model(spec)
        j = 0
        C = build_DM_ops(spec, "C", j, model.layout)
        tail, head = model.lattice.endpoints(j)
        for a, alpha, beta in itertools.product(range(2), repeat=3):
            d = np.zeros(model.layout.n_sites, dtype=int)
            d[model.layout.site("edge", j)] = a
            d[model.layout.site("vertex", tail)] = alpha
            d[model.layout.site("vertex", head)] = beta
            idx = model.layout.index(d)
            val = C.to_sparse()[idx, idx]
            assert val == (1.0 if beta == (alpha + a) % 2 else 0.0)

    @pytest.mark.parametrize("theta,M", [("trivial", 3), ("regular", 3), ("blocks:1,2", 5)])
    def test_solvable(self, theta, M):
        assert solvability_check(ModelSpec.vertex(3, M, theta)).ok

    def test_vertex_matter_rotates(self):
        spec = ModelSpec.vertex(2, 2, "regular")
        A = build_DM_ops(spec, "A", 0)
        assert spec.layout().site("vertex", 0) in A.sites
        with pytest.raises(ValueError):
            build_DM_ops(spec, "Q", 0)


class TestHamiltonian:
    @pytest.mark.parametrize("N", [2, 3])
    def test_single_level_matter_adds_constant(self, N):
        H1, e1 = build_hamiltonian(ModelSpec.dual(N, 1, 0))
        H0, e0 = build_hamiltonian(ModelSpec.double(N))
        E = 8
        diff = H1.to_sparse() - (H0.to_sparse() - E * sp.eye_array(H0.layout.dim))
        assert abs(diff).max() < 1e-12
        assert e1 == e0 - E

    def test_ground_energy(self):
        _, e0 = build_hamiltonian(ModelSpec.dual(2, 2, 1))
        assert e0 == -16

    def test_commutes_with_terms(self):
        m = Model(ModelSpec.dual(2, 2, 1))
        H = m.hamiltonian
        for op in [m.ops.A[0], m.ops.B[1], m.ops.E[2]]:
            assert commutator_norm(H, op) < 1e-10


class TestSolvability:
    def test_mutation_detected(self):
        spec = ModelSpec.dual(3, 3, 1)
        m = Model(spec)
        bad = [build_edge_op_dual(spec, j, m.layout, p2_shift=1) for j in range(m.lattice.n_edges)]
        rep = solvability_check(spec, terms=m.ops.A + m.ops.B + bad)
        assert rep.max_commutator > 0.1 and not rep.ok
        assert rep.worst_pair[0].startswith("B") and rep.worst_pair[1].startswith("D")

    def test_plain_double(self):
        rep = solvability_check(ModelSpec.double(4))
        assert rep.ok and rep.pairs_checked > 0

    def test_never_raises(self):
        class Broken:
            spec = None

        rep = solvability_check(Broken())
        assert rep.error is not None and not rep.ok

    @pytest.mark.parametrize("N,K", [(2, 4), (3, 3), (4, 2)])
    def test_swept_specs(self, N, K):
        for f in enumerate_homomorphisms(K, N):
            assert solvability_check(ModelSpec.dual(N, K, f.multiplier, swap=True)).ok


class TestTotalHamiltonian:
    def test_single_level_matter(self):
        t = build_total_hamiltonian(ModelSpec.dual(2, 1, 0), ModelSpec.vertex(2, 1))
        assert all(v == 0 for v in t.cross_commutators.values())
        assert len(t.hamiltonian) == 16 + 16

    def test_trivial_couplings_commute(self):
        t = build_total_hamiltonian(ModelSpec.dual(2, 2, 0), ModelSpec.vertex(2, 2))
        assert max(t.cross_commutators.values()) < 1e-10

    def test_nontrivial_couplings_reported(self):
        t = build_total_hamiltonian(ModelSpec.dual(2, 2, 1), ModelSpec.vertex(2, 2, "regular"))
        assert set(t.as_dict()) == {f"dual.{a}|vertex.{b}" for a in "ABE" for b in "ABE"}
        assert all(v >= 0 for v in t.cross_commutators.values())

    def test_mismatch(self):
        with pytest.raises(ValueError, match="mismatched"):
            build_total_hamiltonian(ModelSpec.dual(2, 2, 0), ModelSpec.vertex(3, 2))
        with pytest.raises(ValueError, match="mismatched"):
            build_total_hamiltonian(ModelSpec.dual(2, 2, 0), ModelSpec.vertex(2, 2, rows=3))
