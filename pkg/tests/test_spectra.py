import numpy as np
import pytest

from oracles import DenseModel, dense_ground_count, negation_permutation
from qdlab.hilbert import StateVector
from qdlab.lattice import straight_dual_path, straight_path
from qdlab.models import Model, ModelSpec
from qdlab.spectra import (
    CapExceeded,
    ConfinementProfile,
    confinement_profile,
    dense_spectrum,
    diagonalize_edge_op,
    edge_eigenvalue_formula,
    energy,
    first_levels,
    fake_holonomy,
    ground_multiplicity,
    ground_space_dimension,
    ground_state,
    gsd_report,
    solve_w_operators,
    string_x,
    string_z,
    term_violations,
)


class TestTraceOracle:
    @pytest.mark.parametrize("N,K,n", [(2, 1, 0), (2, 2, 0), (2, 2, 1)])
    def test_matches_independent_diagonalization(self, N, K, n):
        spec = ModelSpec.dual(N, K, n)
        ref = DenseModel(N, K, n)
        count = dense_ground_count(ref.hamiltonian(), spec.ground_energy)
        assert ground_space_dimension(spec) == count

    def test_plain_double(self):
        assert ground_space_dimension(ModelSpec.double(2)) == 4
        assert ground_space_dimension(ModelSpec.double(3)) == 9

    def test_larger_torus(self):
        # the degeneracy is a torus invariant, not a lattice-size effect
        assert ground_space_dimension(ModelSpec.dual(2, 2, 0, rows=2, cols=3)) == 8
        assert ground_space_dimension(ModelSpec.dual(2, 2, 1, rows=3, cols=2)) == 1

    def test_vertex_family(self):
        # constant matter on a connected lattice times the toric-code sector
        assert ground_space_dimension(ModelSpec.vertex(2, 2, "trivial")) == 8
        spec = ModelSpec.vertex(2, 2, "regular")
        ev = dense_spectrum(spec)
        assert ground_space_dimension(spec) == ground_multiplicity(ev, spec.ground_energy)

    @pytest.mark.parametrize("N,K,n", [(2, 1, 0), (2, 2, 1)])
    def test_first_levels(self, N, K, n):
        spec = ModelSpec.dual(N, K, n)
        ev = np.linalg.eigvalsh(DenseModel(N, K, n).hamiltonian().toarray())
        e0 = spec.ground_energy
        assert first_levels(spec) == (ground_multiplicity(ev, e0), ground_multiplicity(ev, e0 + 1))

    def test_report(self):
        rep = gsd_report(ModelSpec.dual(2, 3, 0))
        assert rep.dimension == rep.formula == 12 and rep.match
        assert rep.as_dict()["hilbert_dim"] == 2**8 * 3**4
        assert gsd_report(ModelSpec.vertex(2, 2)).match is None

    def test_cap(self, monkeypatch):
        with pytest.raises(CapExceeded, match="1000"):
            ground_space_dimension(ModelSpec.dual(2, 2, 1), cap=1000)
        monkeypatch.setenv("QDLAB_CAP", "100")
        with pytest.raises(CapExceeded, match="100"):
            ground_space_dimension(ModelSpec.dual(2, 2, 1))
        assert ground_space_dimension(ModelSpec.dual(2, 2, 1), cap=5000) == 1


class TestGroundStates:
    def test_eigen_relations(self):
        m = Model(ModelSpec.dual(3, 3, 1))
        xi = ground_state(m)
        assert abs(xi.norm() - 1) < 1e-12
        for op in m.ops.all():
            assert (op.apply(xi) - xi).norm() < 1e-10
        assert energy(m, xi) == pytest.approx(m.ground_energy, abs=1e-10)

    def test_trivial_coupling_pair_orthogonal(self):
        m = Model(ModelSpec.dual(2, 2, 0))
        a, b = ground_state(m, 0), ground_state(m, 1)
        assert abs(a.inner(b)) < 1e-10

    def test_kernel_references(self):
        m = Model(ModelSpec.dual(4, 4, 2))
        a, b = ground_state(m, 0), ground_state(m, 2)
        assert abs(a.inner(b)) < 1e-10
        for op in m.ops.all()[:6]:
            assert (op.apply(b) - b).norm() < 1e-10
        with pytest.raises(ValueError, match="outside ground sector"):
            ground_state(m, 1)

    def test_orbit_overlaps_are_zero_or_one(self):
        m = Model(ModelSpec.dual(2, 3, 0))
        states = [ground_state(m, a, face=p) for a in range(3) for p in (0, 3)]
        for s in states:
            for t in states:
                ov = abs(s.inner(t))
                assert ov < 1e-10 or abs(ov - 1) < 1e-10

    def test_no_face_reference_without_matter(self):
        with pytest.raises(ValueError):
            ground_state(ModelSpec.double(2), 1)


class TestStrings:
    def test_identities(self):
        spec = ModelSpec.dual(2, 2, 1)
        lat = spec.lattice
        empty = lat.path(0, [])
        assert (string_z(spec, empty, 1) - 1.0).max_abs() == 0
        assert (string_z(spec, straight_path(lat, 0, "+x", 1), 0) - 1.0).max_abs() < 1e-15
        assert (string_x(spec, lat.dual_path(0, []), 1) - 1.0).max_abs() == 0

    def test_two_edge_z_string(self):
        spec = ModelSpec.dual(2, 2, 1, rows=3, cols=3)
        lat = spec.lattice
        path = lat.path(0, ["+x", "+y"])
        op = string_z(spec, path, 1)
        assert op.sites == tuple(sorted(path.edges))
        np.testing.assert_allclose(op.matrix.diagonal(), np.kron([1, -1], [1, -1]))

    def test_signs_follow_traversal(self):
        spec = ModelSpec.dual(3, 1, 0, rows=2, cols=3)
        lat = spec.lattice
        fwd = string_z(spec, straight_path(lat, 0, "+x", 1), 1)
        back = string_z(spec, straight_path(lat, 1, "-x", 1), 1)
        assert (fwd - back.adjoint()).max_abs() < 1e-12

    def test_invalid_path(self):
        from qdlab.lattice import Path

        spec = ModelSpec.dual(2, 2, 1, rows=3, cols=3)
        with pytest.raises(ValueError, match="invalid path"):
            string_z(spec, Path((0, 3), (1, -1), (0, 1, 4)), 1)

    def test_x_loop_is_a_symmetry_of_the_ground_space(self):
        m = Model(ModelSpec.dual(2, 2, 1))
        xi = ground_state(m)
        loop = string_x(m, straight_dual_path(m.lattice, 0, "+y", 2), 1)
        assert energy(m, loop.apply(xi)) == pytest.approx(m.ground_energy, abs=1e-10)

    def test_z_string_violations(self):
        m = Model(ModelSpec.dual(2, 2, 1, rows=2, cols=4))
        xi = ground_state(m)
        psi = string_z(m, straight_path(m.lattice, 0, "+x", 2), 1).apply(xi)
        v = term_violations(m, psi)
        assert v["A"] == pytest.approx(2) and v["E"] == pytest.approx(2) and v["B"] == pytest.approx(0, abs=1e-10)


class TestConfinement:
    def test_profile_validation(self):
        with pytest.raises(ValueError):
            ConfinementProfile(1, "z", [2, 1], [0.0, 0.0])

    def test_zero_charge(self):
        prof = confinement_profile(ModelSpec.dual(2, 2, 1, rows=2, cols=4), 0, [1, 2, 3])
        assert prof.delta_e == pytest.approx([0, 0, 0], abs=1e-10)

    def test_unconfined_charge_in_intermediate_class(self):
        # Z_4 gauge, Z_2 matter, n=2: charge 2 pairs trivially with Im f = {0, 2}
        m = Model(ModelSpec.dual(4, 2, 2, rows=2, cols=3))
        xi = ground_state(m)
        free = confinement_profile(m, 2, [1, 2], reference=xi)
        bound = confinement_profile(m, 1, [1, 2], reference=xi)
        assert free.delta_e == pytest.approx([2, 2], abs=1e-8)
        assert bound.is_strictly_increasing()
        assert bound.delta_e == pytest.approx([3, 4], abs=1e-8)

    def test_sparkline(self):
        prof = ConfinementProfile(1, "z", [1, 2, 3], [3.0, 4.0, 5.0])
        assert len(prof.sparkline()) == 3 and prof.sparkline()[-1] == "█"


class TestWOperators:
    def test_single_level_matter(self):
        table = solve_w_operators(ModelSpec.dual(3, 1, 0))
        assert table.monomials() == {(J, 0): ([(0, 0)] if J == 0 else []) for J in range(3)}

    def test_entries_satisfy_relations(self):
        spec = ModelSpec.dual(4, 4, 1)
        table = solve_w_operators(spec, face=2)
        # faithful coupling: every (J, K) is reached by exactly one monomial
        assert all(len(v) == 1 for v in table.entries.values())

    def test_refused_for_vertex_family(self):
        with pytest.raises(ValueError):
            solve_w_operators(ModelSpec.vertex(2, 2))


class TestEdgeDiagonalization:
    def test_single_level_matter(self):
        spec = ModelSpec.dual(3, 1, 0)
        rep = diagonalize_edge_op(spec, 0)
        np.testing.assert_allclose(rep.eigenvalues, 1.0, atol=1e-12)

    @pytest.mark.parametrize("N,K,n", [(4, 4, 3), (4, 2, 2), (3, 3, 1)])
    def test_formula(self, N, K, n):
        rep = diagonalize_edge_op(ModelSpec.dual(N, K, n), 1)
        assert rep.diagonal and rep.max_formula_error < 1e-10
        vals = rep.eigenvalues
        assert np.all((np.abs(vals) < 1e-10) | (np.abs(vals - 1) < 1e-10))

    def test_formula_by_hand(self):
        # D^2(Z_2), n=1: eigenvalue 1 iff alpha + g + beta is even
        for a in range(2):
            for g in range(2):
                for b in range(2):
                    assert edge_eigenvalue_formula(2, 2, 1, a, g, b) == pytest.approx(float((a + g + b) % 2 == 0))


class TestFakeHolonomy:
    def test_values(self):
        spec = ModelSpec.dual(2, 2, 1)
        layout = spec.layout()
        zero = np.zeros(layout.n_sites, dtype=int)
        assert fake_holonomy(spec, 0, zero).value == 0
        d = zero.copy()
        d[layout.site("face", 0)] = 1
        assert fake_holonomy(spec, 0, d).value == 1
        m = Model(spec)
        out = m.ops.B[0].apply(StateVector.basis(layout, d))
        assert out.nnz == 0

    def test_kernel_matter(self):
        spec = ModelSpec.dual(4, 4, 2)
        layout = spec.layout()
        d = np.zeros(layout.n_sites, dtype=int)
        d[layout.site("face", 3)] = 2
        assert fake_holonomy(spec, 3, d).value == 0
        assert fake_holonomy(spec, 3, layout.index(d)).value == 0

    def test_invalid(self):
        spec = ModelSpec.dual(2, 2, 1)
        with pytest.raises(IndexError):
            fake_holonomy(spec, 9, np.zeros(12, dtype=int))
        with pytest.raises(ValueError):
            fake_holonomy(spec, 0, np.zeros(5, dtype=int))


def test_convention_swap_is_a_relabeling():
    # on Z_2 the two conventions coincide; on Z_3 they differ by g -> -g on edges
    h = lambda spec: Model(spec).hamiltonian.to_sparse().tocsr()  # noqa: E731
    assert abs(h(ModelSpec.dual(2, 2, 1)) - h(ModelSpec.dual(2, 2, 1, swap=True))).max() == 0
    spec = ModelSpec.dual(3, 3, 1)
    H, Hs = h(spec), h(ModelSpec.dual(3, 3, 1, swap=True))
    assert abs(H - Hs).max() > 0.5
    U = negation_permutation(spec.layout())
    assert abs(U @ H @ U.T - Hs).max() < 1e-12
    assert ground_space_dimension(ModelSpec.dual(3, 3, 1, swap=True)) == 1


def test_dense_refused_when_large():
    with pytest.raises(CapExceeded):
        dense_spectrum(ModelSpec.dual(2, 3, 0))
