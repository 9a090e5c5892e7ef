import numpy as np
import pytest

from nucmem import (
    SPIN_DOWN,
    SPIN_UP,
    CouplingProfile,
    DegenerateStateError,
    InvalidArgumentError,
    NuclearSector,
    ResourceCapError,
    StateVector,
    SubspaceViolationError,
    apply_collective_raising,
    aux_mode_lowering,
    bright_fock_state,
    bright_mode_lowering,
    build_operator,
    commutator_defect,
    enumerate_sectors,
    enumerate_subspace,
    generate_profile,
    gram_schmidt_modes,
    ground_state,
    ladder_matrix_element,
    nuc_minus,
    nuc_plus,
    nuc_z,
    permutation_mode,
    random_state,
    sigma_minus,
    sigma_plus,
    sigma_z,
)
from nucmem.verify import (
    check_boson_limit,
    check_commutator_bound,
    check_jz_block_diagonal,
    check_ladder_convention_guard,
    check_mode_sum_rule,
)


# ---------------------------------------------------------------------------
# basis enumeration
# ---------------------------------------------------------------------------

def test_single_flip_subspace():
    basis = enumerate_subspace(2, 0.5, 0)
    states = [(spin, tuple(cfg)) for _, spin, _, cfg in basis.state_tuples()]
    assert states == [(SPIN_UP, (0, 0)), (SPIN_DOWN, (1, 0)), (SPIN_DOWN, (0, 1))]


def test_subspace_dimension_n1():
    basis = enumerate_subspace(80, 0.5, 1)
    assert basis.dim == 80 + 80 * 79 // 2 == 3240


def test_subspace_dimension_spin_one():
    basis = enumerate_subspace(3, 1, 2)
    assert basis.nuclear[0].dim == 6
    assert basis.nuclear[1].dim == 7
    assert basis.dim == 13


def test_sector_sums_and_uniqueness():
    basis = enumerate_subspace(4, 1, 2)
    seen = set()
    for _, spin, nu, cfg in basis.state_tuples():
        key = (spin, bytes(cfg))
        assert key not in seen
        seen.add(key)
        assert cfg.sum() == nu
        assert nu == (2 if spin == SPIN_UP else 3)
    assert len(seen) == basis.dim


def test_subspace_bounds():
    with pytest.raises(InvalidArgumentError):
        enumerate_subspace(4, 0.5, -1)
    with pytest.raises(InvalidArgumentError):
        enumerate_subspace(4, 0.5, 4)  # max n is 2 N I0 - 1 = 3
    enumerate_subspace(4, 0.5, 3)


def test_dimension_cap():
    with pytest.raises(ResourceCapError) as err:
        enumerate_subspace(40, 0.5, 10, dim_cap=1000)
    assert err.value.requested > 1000


def test_invalid_spin():
    with pytest.raises(InvalidArgumentError):
        enumerate_subspace(4, 0.3, 0)
    with pytest.raises(InvalidArgumentError):
        enumerate_subspace(4, -0.5, 0)


def test_basis_json_export():
    import json
    basis = enumerate_subspace(2, 0.5, 0)
    entries = json.loads(basis.export_json())
    assert entries[0] == {"electron": "up", "l": [-0.5, -0.5]}
    assert entries[1] == {"electron": "down", "l": [0.5, -0.5]}


# ---------------------------------------------------------------------------
# ladder elements
# ---------------------------------------------------------------------------

def test_ladder_spin_half():
    assert ladder_matrix_element(0.5, -0.5, "raise") == pytest.approx(1.0)


def test_ladder_spin_one():
    assert ladder_matrix_element(1, -1, "raise") == pytest.approx(np.sqrt(2))


def test_ladder_spin_three_halves_vs_explicit_matrices():
    # independent check: build the 4x4 raising matrix of a spin-3/2 from
    # the commutation-complete basis |m> = |3/2>, |1/2>, |-1/2>, |-3/2>
    m_values = [1.5, 0.5, -0.5, -1.5]
    raising = np.zeros((4, 4))
    for col, m in enumerate(m_values):
        if m < 1.5:
            raising[col - 1, col] = np.sqrt(1.5 * 2.5 - m * (m + 1))
    assert ladder_matrix_element(1.5, 0.5, "raise") == pytest.approx(np.sqrt(3))
    assert raising[m_values.index(0.5) - 1, m_values.index(0.5)] == pytest.approx(np.sqrt(3))
    # and the full ladder agrees entry by entry
    for col, m in enumerate(m_values[1:], start=1):
        assert raising[col - 1, col] == pytest.approx(
            ladder_matrix_element(1.5, m, "raise"))


def test_ladder_rejects_out_of_range():
    with pytest.raises(InvalidArgumentError):
        ladder_matrix_element(0.5, 1.5, "raise")
    with pytest.raises(InvalidArgumentError):
        ladder_matrix_element(0.5, 0.5, "raise")  # target above I0
    with pytest.raises(InvalidArgumentError):
        ladder_matrix_element(1, -1, "lower")
    with pytest.raises(InvalidArgumentError):
        ladder_matrix_element(1, 0, "sideways")


# ---------------------------------------------------------------------------
# operator expressions
# ---------------------------------------------------------------------------

def test_sigma_z_matrix():
    basis = enumerate_subspace(2, 0.5, 0)
    op = build_operator(basis, sigma_z())
    assert np.array_equal(op.toarray().diagonal(), [1.0, -1.0, -1.0])


def test_total_nuclear_z():
    basis = enumerate_subspace(2, 0.5, 0)
    op = build_operator(basis, sum(nuc_z(j) for j in range(2)))
    assert np.array_equal(op.toarray().diagonal(), [-1.0, 0.0, 0.0])


def test_single_site_exchange_matrix():
    basis = enumerate_subspace(2, 0.5, 0)
    op = build_operator(basis, sigma_plus() * nuc_minus(0) + sigma_minus() * nuc_plus(0))
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 0] = 1.0  # couples |up;--> and |down;+->
    assert np.array_equal(op.toarray(), expected)
    assert op.hermitian


def test_bare_raising_violates_subspace():
    basis = enumerate_subspace(2, 0.5, 0)
    with pytest.raises(SubspaceViolationError) as err:
        build_operator(basis, sigma_plus())
    assert "sigma_plus" in str(err.value)


def test_expression_scalars_and_products():
    basis = enumerate_subspace(2, 0.5, 0)
    a = build_operator(basis, 2.0 * sigma_z() - sigma_z())
    b = build_operator(basis, sigma_z())
    assert a.max_abs_diff(b) == 0.0
    sq = build_operator(basis, sigma_z() * sigma_z())
    assert np.array_equal(sq.toarray().diagonal(), [1.0, 1.0, 1.0])


def test_spin_one_site_operators():
    basis = enumerate_subspace(2, 1, 1)
    op = build_operator(basis, nuc_plus(0) * nuc_minus(0))
    # I+I- eigenvalue on m = -1 + delta: 2 I0 d - d(d-1) with I0 = 1
    for idx, _, _, cfg in basis.state_tuples():
        d = int(cfg[0])
        assert op.toarray()[idx, idx] == pytest.approx(2 * d - d * (d - 1))


# ---------------------------------------------------------------------------
# collective modes
# ---------------------------------------------------------------------------

def test_bright_lowering_annihilates_polarized():
    p = generate_profile("uniform", 5, seed=1)
    g0 = ground_state(5, 0.5)
    low = bright_mode_lowering(g0.basis, p)
    assert low.shape == (0, 1)
    assert low.apply(g0.amplitudes).size == 0


def test_bright_one_quantum_state_homogeneous():
    p = generate_profile("homogeneous", 6)
    state = apply_collective_raising(p.g, ground_state(6, 0.5))
    assert state.norm == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(state.amplitudes, np.full(6, 1 / np.sqrt(6)))


def test_commutator_on_polarized_state():
    p = generate_profile("uniform", 7, seed=2)
    g0 = ground_state(7, 0.5)
    res = commutator_defect(p, g0)
    assert res.value == 0.0
    # so <[A, A+]> = 1 exactly on the polarized state
    raised = apply_collective_raising(p.g, g0)
    assert raised.norm ** 2 == pytest.approx(1.0, abs=1e-14)


def test_commutator_single_flip():
    p = generate_profile("homogeneous", 4)
    sector = NuclearSector(4, 0.5, 1)
    amps = np.zeros(4, complex)
    amps[sector.index(np.array([1, 0, 0, 0], dtype=np.int8))] = 1.0
    res = commutator_defect(p, StateVector(sector, amps))
    assert res.value == pytest.approx(0.5, abs=1e-14)


def test_commutator_bound_random_states():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(3, 13))
        i0 = float(rng.choice([0.5, 1.0]))
        exc = int(rng.integers(0, min(4, n * int(2 * i0))))
        p = CouplingProfile(g=rng.uniform(0.5, 2.0, n))
        basis = enumerate_subspace(n, i0, exc)
        res = commutator_defect(p, random_state(basis, rng))
        assert res.value <= res.bound * (1 + 1e-12)


def test_aux_mode_commutes_with_bright_on_polarized():
    p = generate_profile("gaussian", 6, width=3.0)
    modes = gram_schmidt_modes(p)
    g0 = ground_state(6, 0.5)
    bright_up = apply_collective_raising(p.g, g0)
    for k in range(2, 7):
        aux_up = apply_collective_raising(modes.vector(k), g0)
        # <G| C_k A^dag |G> = overlap of the two one-quantum states = 0
        assert abs(aux_up.dot(bright_up)) < 1e-14
        assert aux_up.norm ** 2 == pytest.approx(1.0, abs=1e-14)


def test_permutation_aux_mode_orthogonal_states():
    p = generate_profile("homogeneous", 4)
    h = permutation_mode(p)
    g0 = ground_state(4, 0.5)
    aux = apply_collective_raising(h, g0)
    bright = apply_collective_raising(p.g, g0)
    assert abs(aux.dot(bright)) < 1e-14


def test_aux_mode_lowering_index_bounds():
    p = generate_profile("homogeneous", 4)
    modes = gram_schmidt_modes(p)
    sector = NuclearSector(4, 0.5, 1)
    with pytest.raises(InvalidArgumentError):
        aux_mode_lowering(sector, modes, 1)
    with pytest.raises(InvalidArgumentError):
        aux_mode_lowering(sector, modes, 5)
    aux_mode_lowering(sector, modes, 4)


def test_bright_fock_states():
    p = generate_profile("homogeneous", 4)
    f0 = bright_fock_state(p, 0.5, 0)
    assert f0.norm_defect == 0.0
    assert f0.state.basis.nu == 0
    f1 = bright_fock_state(p, 0.5, 1)
    assert f1.norm_defect == pytest.approx(0.0, abs=1e-14)
    f2 = bright_fock_state(p, 0.5, 2)
    # ||(A+)^2|G>||^2 = 2 (1 - 1/N) = 1.5 for N = 4
    assert f2.norm_defect == pytest.approx(0.25, abs=1e-14)


def test_bright_fock_state_brute_force_norm():
    # independent expansion over the C(4, 2) two-flip states
    p = generate_profile("homogeneous", 4)
    import itertools
    amp = {}
    for i, j in itertools.permutations(range(4), 2):
        key = frozenset((i, j))
        amp[key] = amp.get(key, 0.0) + 1.0 / np.sqrt(4) / np.sqrt(4)
    norm_sq = sum(a ** 2 for a in amp.values())
    assert norm_sq == pytest.approx(1.5)
    f2 = bright_fock_state(p, 0.5, 2)
    assert abs(norm_sq - 2.0) / 2.0 == pytest.approx(f2.norm_defect)


def test_bright_fock_overflow():
    p = generate_profile("homogeneous", 2)
    with pytest.raises(DegenerateStateError):
        bright_fock_state(p, 0.5, 3)  # only two spin-1/2 sites


def test_operator_triplet_export(tmp_path):
    basis = enumerate_subspace(2, 0.5, 0)
    op = build_operator(basis, sigma_plus() * nuc_minus(1) + sigma_minus() * nuc_plus(1))
    path = tmp_path / "op.csv"
    op.export_triplets(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "row,col,re,im"
    assert "0,2,1,0" in lines and "2,0,1,0" in lines


# ---------------------------------------------------------------------------
# structural invariants (shared with the verify suite)
# ---------------------------------------------------------------------------

def test_conserved_sectors_block_diagonal():
    ok, detail = check_jz_block_diagonal(seed=0)
    assert ok, detail


def test_boson_limit_closed_form():
    ok, detail = check_boson_limit(seed=0)
    assert ok, detail


def test_mode_occupation_sum_rule():
    ok, detail = check_mode_sum_rule(seed=0)
    assert ok, detail


def test_commutator_bound_suite():
    ok, detail = check_commutator_bound(seed=1)
    assert ok, detail


def test_ladder_convention_guard():
    ok, detail = check_ladder_convention_guard(seed=0)
    assert ok, detail


def test_union_basis_supports_cross_sector_operators():
    basis = enumerate_sectors(3, 0.5, [(SPIN_UP, 0), (SPIN_DOWN, 1),
                                       (SPIN_UP, 1), (SPIN_DOWN, 2)])
    op = build_operator(basis, sigma_plus() * nuc_minus(0))
    assert op.nnz > 0  # lands inside the union basis
    small = enumerate_subspace(3, 0.5, 0)
    with pytest.raises(SubspaceViolationError):
        build_operator(small, nuc_plus(0))
