import json

import numpy as np
import pytest

from nucmem import (
    CouplingProfile,
    InvalidArgumentError,
    UnsupportedConstructionError,
    generate_profile,
    gram_schmidt_modes,
    homogeneity_metrics,
    permutation_mode,
)


def test_homogeneous_profile_is_constant():
    p = generate_profile("homogeneous", 4, g0=1.0)
    assert np.array_equal(p.g, np.ones(4))


def test_outlier_preset_statistics():
    # one coupling at 10 g among 10^4: mean of squares (9999 + 100)/1e4
    p = generate_profile("preset_counterexample_1", 10 ** 4)
    assert p.mean_sq == pytest.approx(1.0099, rel=1e-12)
    assert p.max_sq == 100.0


def test_half_and_half_preset_statistics_exact():
    p = generate_profile("preset_counterexample_2", 10 ** 4)
    assert p.mean_sq == 5.0
    assert p.max_sq == 9.0
    assert p.abs_dev_sq == 4.0


def test_outlier_metrics():
    p = generate_profile("preset_counterexample_1", 10 ** 4)
    r = homogeneity_metrics(p)
    # exact values 100/1.0099 and (2 * 9999 * 0.0099 / 1e4) / 1.0099
    assert r.ratio_max == pytest.approx(99.01970492127933, rel=1e-12)
    assert r.ratio_dev == pytest.approx(0.019603940984255885, rel=1e-12)
    assert not r.max_ratio_ok and r.dev_ratio_ok


def test_half_and_half_metrics():
    p = generate_profile("preset_counterexample_2", 1000)
    r = homogeneity_metrics(p)
    assert r.ratio_max == pytest.approx(1.8, rel=1e-14)
    assert r.ratio_dev == pytest.approx(0.8, rel=1e-14)
    assert r.max_ratio_ok and not r.dev_ratio_ok


def test_homogeneous_metrics_fixed_point():
    r = homogeneity_metrics(generate_profile("homogeneous", 17, g0=2.3))
    assert r.ratio_max == 1.0
    assert r.ratio_dev == 0.0
    assert r.passes_both


def test_metrics_scale_invariance():
    rng = np.random.default_rng(1)
    g = rng.uniform(0.2, 3.0, 23)
    r1 = homogeneity_metrics(CouplingProfile(g=g))
    r2 = homogeneity_metrics(CouplingProfile(g=7.5 * g))
    assert r1.ratio_max == pytest.approx(r2.ratio_max, rel=1e-13)
    assert r1.ratio_dev == pytest.approx(r2.ratio_dev, rel=1e-13)


def test_gaussian_envelope_is_deterministic():
    a = generate_profile("gaussian", 80, center=40, width=20)
    b = generate_profile("gaussian", 80, center=40, width=20)
    assert np.array_equal(a.g, b.g)
    j = np.arange(1, 81)
    assert a.g == pytest.approx(np.exp(-((j - 40.0) ** 2) / (2 * 400.0)), rel=1e-15)


def test_gaussian_default_width_metrics():
    # width N/4 is a strongly peaked envelope; neither criterion holds
    # (brute-force values: ratio_max 2.2674, ratio_dev 0.7012)
    r = homogeneity_metrics(generate_profile("gaussian", 80, seed=42))
    assert r.ratio_max == pytest.approx(2.2674036817702787, rel=1e-12)
    assert r.ratio_dev == pytest.approx(0.7011731358670165, rel=1e-12)
    assert not r.max_ratio_ok and not r.dev_ratio_ok


def test_gaussian_wide_envelope_passes_both():
    # width = N is flat enough for both criteria; used for the spectrum study
    r = homogeneity_metrics(generate_profile("gaussian", 80, width=80))
    assert r.max_ratio_ok and r.dev_ratio_ok


def test_gaussian_jitter_seeded():
    a = generate_profile("gaussian", 30, width=10, jitter=0.2, seed=7)
    b = generate_profile("gaussian", 30, width=10, jitter=0.2, seed=7)
    c = generate_profile("gaussian", 30, width=10, jitter=0.2, seed=8)
    assert np.array_equal(a.g, b.g)
    assert not np.array_equal(a.g, c.g)
    assert np.all(a.g > 0)


def test_uniform_profile_positive_and_seeded():
    a = generate_profile("uniform", 50, low=0.2, high=1.1, seed=3)
    b = generate_profile("uniform", 50, low=0.2, high=1.1, seed=3)
    assert np.array_equal(a.g, b.g)
    assert np.all((a.g >= 0.2) & (a.g <= 1.1))


def test_generate_profile_rejects_bad_arguments():
    with pytest.raises(InvalidArgumentError):
        generate_profile("homogeneous", 1)
    with pytest.raises(InvalidArgumentError):
        generate_profile("gaussian", 10, width=-1.0)
    with pytest.raises(InvalidArgumentError):
        generate_profile("uniform", 10, low=-0.5, high=1.0)
    with pytest.raises(InvalidArgumentError):
        generate_profile("custom", 10)
    with pytest.raises(InvalidArgumentError):
        generate_profile("nope", 10)
    with pytest.raises(InvalidArgumentError):
        CouplingProfile(g=np.array([1.0, -2.0]))


def test_ratio_max_one_only_when_homogeneous():
    rng = np.random.default_rng(5)
    for _ in range(30):
        g = rng.uniform(0.5, 2.0, int(rng.integers(2, 30)))
        r = homogeneity_metrics(CouplingProfile(g=g))
        assert r.ratio_max >= 1.0
        if not np.allclose(g, g[0]):
            assert r.ratio_max > 1.0
            assert r.ratio_dev > 0.0


def test_gram_schmidt_two_sites():
    modes = gram_schmidt_modes(generate_profile("homogeneous", 2))
    s = 1 / np.sqrt(2)
    assert modes.vector(1) == pytest.approx([s, s])
    assert np.abs(modes.vector(2)) == pytest.approx([s, s])
    assert modes.vector(2) @ modes.vector(1) == pytest.approx(0.0, abs=1e-15)


def test_gram_schmidt_orthonormal_random():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 65))
        modes = gram_schmidt_modes(CouplingProfile(g=rng.uniform(0.5, 2.0, n)))
        gram = modes.h @ modes.h.T
        assert np.abs(gram - np.eye(n)).max() < 1e-12


def test_gram_schmidt_auxiliary_orthogonal_to_couplings():
    p = generate_profile("gaussian", 6, width=2.0)
    modes = gram_schmidt_modes(p)
    gnorm = np.linalg.norm(p.g)
    for k in range(2, 7):
        assert abs(modes.vector(k) @ p.g) < 1e-12 * gnorm


def test_permutation_mode_pairs():
    p = CouplingProfile(g=np.array([1.0, 2.0, 3.0, 4.0]))
    h = permutation_mode(p)
    assert h == pytest.approx([3.0, 4.0, -1.0, -2.0])
    assert h @ p.g == 0.0


def test_permutation_mode_homogeneous():
    h = permutation_mode(generate_profile("homogeneous", 4))
    assert h == pytest.approx([1.0, 1.0, -1.0, -1.0])


def test_permutation_mode_gaussian_orthogonal_and_homogeneous():
    p = generate_profile("gaussian", 80, width=80.0)
    h = permutation_mode(p)
    assert abs(h @ p.g) < 1e-12 * np.linalg.norm(h) * np.linalg.norm(p.g)
    # |h| is a permutation of g, so it inherits the homogeneity ratios
    r = homogeneity_metrics(CouplingProfile(g=np.abs(h)))
    assert r.max_ratio_ok and r.dev_ratio_ok


def test_permutation_mode_rejects_odd():
    with pytest.raises(UnsupportedConstructionError):
        permutation_mode(generate_profile("homogeneous", 5))


def test_profile_json_roundtrip():
    p = generate_profile("gaussian", 12, width=4.0, jitter=0.1, seed=9)
    q = CouplingProfile.from_json(p.to_json())
    assert np.array_equal(p.g, q.g)
    assert q.kind == "gaussian" and q.seed == 9
    data = json.loads(p.to_json())
    assert set(data) == {"N", "g", "kind", "seed"}


def test_profile_csv(tmp_path):
    p = generate_profile("homogeneous", 3, g0=0.5)
    path = tmp_path / "profile.csv"
    p.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "j,g_j"
    assert lines[1].startswith("1,0.5")
    assert len(lines) == 4
