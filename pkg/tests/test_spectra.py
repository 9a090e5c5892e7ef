import numpy as np
import pytest
import scipy.sparse as sp

from nucmem import (
    InvalidArgumentError,
    ModelParams,
    ResourceCapError,
    SparseOperator,
    build_site_exchange,
    compare_spectra,
    effective_eigenstate,
    effective_spectrum,
    eigensolve,
    enumerate_subspace,
    generate_profile,
    gram_schmidt_modes,
    perturbation_ratio,
    rabi_frequency,
    tune_resonance,
)
from nucmem.verify import (
    check_spectral_symmetry,
    check_trace_preservation,
    check_v0_exactness,
)


def _params(N, I0=0.5, kind="homogeneous", **kw):
    return tune_resonance(ModelParams(
        profile=generate_profile(kind, N, **kw), I0=I0, omega_z=1.0, Omega_z=0.0))


def test_two_level_eigensolve():
    omega = 0.83
    op = SparseOperator(sp.csr_matrix(np.array([[0.0, omega], [omega, 0.0]])))
    spec = eigensolve(op, scale=omega)
    assert spec.eigenvalues == pytest.approx([-omega, omega])
    assert [c.count for c in spec.clusters] == [1, 1]


def test_eigensolve_rejects_non_hermitian():
    op = SparseOperator(sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]])))
    with pytest.raises(InvalidArgumentError):
        eigensolve(op)


def test_eigensolve_dimension_cap():
    op = SparseOperator(sp.eye(10, format="csr"))
    with pytest.raises(ResourceCapError):
        eigensolve(op, dim_cap=5)


def test_exchange_spectrum_smallest_ensemble():
    params = _params(2)
    basis = enumerate_subspace(2, 0.5, 0)
    spec = eigensolve(build_site_exchange(params, basis), scale=params.rabi)
    s = 1 / np.sqrt(2)
    assert spec.eigenvalues == pytest.approx([-s, 0.0, s], abs=1e-14)


def test_exchange_clusters_match_angular_momentum_formulas():
    # homogeneous one-excitation sector: lines at (g/2) sqrt(2N-2) (one),
    # (g/2) sqrt(N-2) (N-1 fold) and zero (N(N-3)/2 fold)
    n_sites = 12
    params = _params(n_sites)
    basis = enumerate_subspace(n_sites, 0.5, 1)
    spec = eigensolve(build_site_exchange(params, basis), scale=params.rabi)
    outer = 0.5 * np.sqrt(2 * n_sites - 2)
    inner = 0.5 * np.sqrt(n_sites - 2)
    centers = [(c.center, c.count) for c in spec.clusters]
    expect = [(-outer, 1), (-inner, n_sites - 1),
              (0.0, n_sites * (n_sites - 3) // 2),
              (inner, n_sites - 1), (outer, 1)]
    assert len(centers) == len(expect)
    for (c, m), (ce, me) in zip(centers, expect):
        assert c == pytest.approx(ce, abs=1e-12)
        assert m == me


def test_effective_spectrum_ground_sector():
    params = _params(10)
    spec = effective_spectrum(params, 0)
    omega = rabi_frequency(params)
    values, counts = np.unique(np.round(spec.eigenvalues, 12), return_counts=True)
    assert values == pytest.approx([-omega, 0.0, omega])
    assert list(counts) == [1, 9, 1]  # N - 1 uncoupled one-quantum states
    assert spec.diag_offset == 0.0


def test_effective_spectrum_one_excitation_counts():
    params = _params(80)
    spec = effective_spectrum(params, 1)
    omega = rabi_frequency(params)
    clusters = [(round(c.center / omega, 6), c.count) for c in spec.clusters]
    assert clusters == [(-np.sqrt(2).round(6), 1), (-1.0, 79), (0.0, 3160),
                        (1.0, 79), (np.sqrt(2).round(6), 1)]
    assert spec.diag_offset == pytest.approx(params.omega_z)


def test_effective_spectrum_needs_resonance():
    p = ModelParams(profile=generate_profile("homogeneous", 8), I0=0.5,
                    omega_z=1.0, Omega_z=0.3)
    with pytest.raises(InvalidArgumentError):
        effective_spectrum(p, 1)


def test_compare_identical_spectra():
    params = _params(20)
    a = effective_spectrum(params, 1)
    cmp = compare_spectra(a, a)
    assert cmp.max_rel_dev == 0.0
    assert cmp.dimension_mismatch == 0
    assert not cmp.unmatched_a and not cmp.unmatched_b


def test_compare_exact_effective_small():
    n_sites = 12
    params = _params(n_sites)
    basis = enumerate_subspace(n_sites, 0.5, 1)
    exact = eigensolve(build_site_exchange(params, basis), scale=params.rabi)
    eff = effective_spectrum(params, 1)
    cmp = compare_spectra(exact, eff)
    assert len(cmp.pairs) == 5
    # hardcore overcounting: ideal-boson space exceeds the spin space by N
    assert cmp.dim_b - cmp.dim_a == n_sites
    assert cmp.dimension_mismatch == n_sites
    # matched line shifts: 1 - sqrt(1 - 2/N) on the inner pair dominates
    devs = sorted(p.dev_rel_scale for p in cmp.pairs)
    assert devs[0] == pytest.approx(0.0, abs=1e-12)
    assert max(devs) == pytest.approx(1 - np.sqrt(1 - 2 / n_sites), rel=1e-9)


def test_compare_rejects_empty():
    params = _params(6)
    a = effective_spectrum(params, 0)
    import dataclasses
    empty = dataclasses.replace(a, eigenvalues=np.array([]), clusters=[])
    with pytest.raises(InvalidArgumentError):
        compare_spectra(a, empty)


def test_effective_eigenstate_is_exact_on_ground_sector():
    # V_0: the pair (|up, G>, |down, bright>) diagonalizes the exchange exactly
    params = _params(9, kind="uniform", seed=10)
    basis = enumerate_subspace(9, 0.5, 0)
    h_s = build_site_exchange(params, basis)
    omega = rabi_frequency(params)
    for sign in (+1, -1):
        psi = effective_eigenstate(params, basis, gram_schmidt_modes(params.profile),
                                   m=0, sign=sign)
        resid = h_s.apply(psi.amplitudes) - sign * omega * psi.amplitudes
        assert np.linalg.norm(resid) < 1e-12 * omega


def test_effective_eigenstate_hardcore_shift_homogeneous():
    # homogeneous aux-mode eigenstate picks up the exact line Omega sqrt(1 - 2/N)
    n_sites = 10
    params = _params(n_sites)
    basis = enumerate_subspace(n_sites, 0.5, 1)
    modes = gram_schmidt_modes(params.profile)
    h_s = build_site_exchange(params, basis)
    omega = rabi_frequency(params)
    shifted = omega * np.sqrt(1 - 2 / n_sites)
    psi = effective_eigenstate(params, basis, modes, m=0, aux_occupations={2: 1})
    resid = h_s.apply(psi.amplitudes) - shifted * psi.amplitudes
    assert np.linalg.norm(resid) < 1e-12 * omega


def test_perturbation_ratio_ground_sector_scaling():
    # exact V_0 eigenstates: shift = gbar/4, so ratio = 1 / (2 sqrt(N))
    for n_sites in (16, 64, 256):
        params = _params(n_sites)
        basis = enumerate_subspace(n_sites, 0.5, 0)
        psi = effective_eigenstate(params, basis, gram_schmidt_modes(params.profile), m=0)
        rep = perturbation_ratio(params, basis, psi, m=0)
        assert rep.ratio == pytest.approx(0.5 / np.sqrt(n_sites), rel=1e-12)


def test_perturbation_ratio_one_excitation():
    n_sites = 100
    params = _params(n_sites)
    basis = enumerate_subspace(n_sites, 0.5, 1)
    modes = gram_schmidt_modes(params.profile)
    psi = effective_eigenstate(params, basis, modes, m=0, aux_occupations={2: 1})
    rep = perturbation_ratio(params, basis, psi, m=0)
    # within a factor 2 of sqrt(n/N) = 0.1 (lands exactly on the boundary)
    assert rep.ratio == pytest.approx(0.05, rel=1e-12)
    assert rep.shift == pytest.approx(params.profile.mean / 4, rel=1e-12)
    assert rep.shift_estimate == pytest.approx(params.profile.mean / 4)


def test_perturbation_ratio_halves_per_quadrupled_n():
    ratios = []
    for n_sites in (25, 100, 400):
        params = _params(n_sites)
        basis = enumerate_subspace(n_sites, 0.5, 1)
        modes = gram_schmidt_modes(params.profile)
        psi = effective_eigenstate(params, basis, modes, m=0, aux_occupations={2: 1})
        ratios.append(perturbation_ratio(params, basis, psi, m=0).ratio)
    assert ratios[0] / ratios[1] == pytest.approx(2.0, abs=0.05)
    assert ratios[1] / ratios[2] == pytest.approx(2.0, abs=0.05)


def test_v0_exactness_random_profiles():
    ok, detail = check_v0_exactness(seed=3, trials=10)
    assert ok, detail


def test_spectral_symmetry_suite():
    ok, detail = check_spectral_symmetry(seed=0)
    assert ok, detail


def test_trace_preservation_suite():
    ok, detail = check_trace_preservation(seed=0)
    assert ok, detail


def test_spectrum_csv(tmp_path):
    params = _params(6)
    spec = effective_spectrum(params, 0)
    path = tmp_path / "spec.csv"
    spec.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "index,eigenvalue"
    assert len(lines) == spec.dim + 1
