import numpy as np
import pytest
import scipy.special

from anosovlab.spectral import (
    TorusMap, TruncatedOperator, apply_composition_heat,
    build_advection_diffusion_generator, build_transfer_operator, gap_sweep,
    resonance_convergence, shear_sector_gaps, spectrum_and_gap,
)

CAT = np.array([[2, 1], [1, 1]])
SHEAR_SHAPE = [((1, 0), (1.0, 1.0), "sin")]   # psi(x) = (sin 2pi x1, sin 2pi x1)


def test_map_validation():
    with pytest.raises(ValueError):
        TorusMap(np.array([[2, 1], [1, 2]]), 0.0, [])      # det = 3
    with pytest.raises(ValueError):
        TorusMap(np.array([[1, 1], [0, 1]]), 0.0, [])      # |trace| = 2
    with pytest.raises(ValueError):
        TorusMap(CAT, 0.2, SHEAR_SHAPE)                    # breaks the diffeo bound


def test_map_applies_mod_one():
    tm = TorusMap(CAT, 0.0, [])
    x = np.array([0.7, 0.9])
    assert np.allclose(tm.apply(x), np.array([0.3, 0.6]), atol=1e-15)


def test_cone_certificate_present():
    tm = TorusMap(CAT, 0.04, SHEAR_SHAPE)
    assert tm.certificate_ratio < 1.0


def test_mode_index_roundtrip():
    op = build_transfer_operator(TorusMap(CAT, 0.0, []), 0.01, 5)
    K1, K2 = op.modes()
    for k1, k2 in ((-5, -5), (0, 0), (3, -2), (5, 5)):
        idx = op.mode_index(k1, k2)
        assert (K1[idx], K2[idx]) == (k1, k2)


def test_unperturbed_operator_is_permutation_with_heat():
    nu, N = 0.013, 6
    op = build_transfer_operator(TorusMap(CAT, 0.0, []), nu, N)
    M = op.matrix
    assert M[op.mode_index(0, 0), op.mode_index(0, 0)] == 1.0
    # k = (1,0) receives only from m = A^{-T} k = (1,-1)
    row = np.array(M[op.mode_index(1, 0)])
    expect = np.exp(-4 * np.pi ** 2 * nu)
    assert abs(row[op.mode_index(1, -1)] - expect) < 1e-15
    row[op.mode_index(1, -1)] = 0.0
    assert np.abs(row).max() == 0.0


def test_perturbed_columns_match_bessel_series():
    # for the pure-shear displacement the column integrals reduce to
    # single-variable Bessel coefficients: the mode-m column has entries
    # damp(k) J_n(2 pi eps (m1+m2)) at k = A^T m + (n, 0)
    eps, nu, N = 0.03, 2e-3, 8
    op = build_transfer_operator(TorusMap(CAT, eps, SHEAR_SHAPE), nu, N)
    K = np.arange(-N, N + 1)
    damp = np.exp(-4 * np.pi ** 2 * nu
                  * (K[:, None] ** 2 + K[None, :] ** 2)).ravel()
    for m in ((1, 1), (2, -1), (0, 3)):
        base = CAT.T @ np.array(m)
        z = 2 * np.pi * eps * (m[0] + m[1])
        col = op.matrix[:, op.mode_index(*m)]
        for n in (-2, -1, 0, 1, 2):
            k = base + np.array([n, 0])
            if np.abs(k).max() > N:
                continue
            idx = op.mode_index(*k)
            ref = damp[idx] * scipy.special.jv(n, z)
            assert abs(col[idx] - ref) < 1e-14


def test_aliasing_guard():
    tm = TorusMap(CAT, 0.01, SHEAR_SHAPE)
    with pytest.raises(ValueError):
        build_transfer_operator(tm, 0.01, 8, fine_grid=32)


def test_transfer_norm_bound():
    from anosovlab.spectral import operator_norm_estimate
    tm = TorusMap(CAT, 0.05, SHEAR_SHAPE)
    op = build_transfer_operator(tm, 1e-3, 10)
    assert operator_norm_estimate(op.matrix) <= 1.0 + 1e-10


def test_action_matches_fine_grid_composition():
    tm = TorusMap(CAT, 0.05, SHEAR_SHAPE)
    nu, N = 1e-3, 8
    op = build_transfer_operator(tm, nu, N)
    rng = np.random.default_rng(2)
    u = rng.normal(size=(2 * N + 1) ** 2) + 1j * rng.normal(size=(2 * N + 1) ** 2)
    direct = op.matrix @ u
    oracle = apply_composition_heat(tm, nu, u, N, oversample=16)
    rel = np.linalg.norm(direct - oracle) / np.linalg.norm(u)
    assert rel <= 1e-8


def test_worker_invariance_of_build():
    tm = TorusMap(CAT, 0.02, SHEAR_SHAPE)
    a = build_transfer_operator(tm, 1e-2, 7, workers=1).matrix
    b = build_transfer_operator(tm, 1e-2, 7, workers=3).matrix
    assert np.array_equal(a, b)


def test_transfer_spectrum_invariants():
    tm = TorusMap(CAT, 0.004, SHEAR_SHAPE)
    op = build_transfer_operator(tm, 1e-3, 12)
    res = spectrum_and_gap(op)
    assert np.abs(res.eigenvalues).max() <= 1.0 + 1e-10
    assert np.sum(np.abs(res.eigenvalues - 1.0) < 1e-8) == 1
    # frozen regression value for this configuration
    assert abs(res.gap - 4.4200527570105945) < 1e-6


def test_gap_truncation_stability():
    tm = TorusMap(CAT, 0.004, SHEAR_SHAPE)
    g = [spectrum_and_gap(build_transfer_operator(tm, 1e-2, N)).gap
         for N in (10, 14)]
    assert abs(g[0] - g[1]) < 1e-6 * max(1.0, g[0])


def test_generator_requires_divergence_free():
    with pytest.raises(ValueError):
        build_advection_diffusion_generator([((1, 1), (1.0, 1.0), "sin")],
                                            0.01, 6)


def test_generator_skew_plus_diagonal():
    nu, N = 0.02, 8
    gen = build_advection_diffusion_generator([((0, 1), (1.0, 0.0), "sin")],
                                              nu, N)
    M = gen.matrix
    K = np.arange(-N, N + 1)
    diag = 4 * np.pi ** 2 * nu * (K[:, None] ** 2 + K[None, :] ** 2).ravel()
    sym = M + M.conj().T
    assert np.abs(sym - 2 * np.diag(diag)).max() < 1e-14


def test_generator_spectrum_in_right_half_plane():
    gen = build_advection_diffusion_generator([((0, 1), (1.0, 0.0), "sin")],
                                              1e-2, 10)
    res = spectrum_and_gap(gen)
    assert res.eigenvalues.real.min() >= -1e-10


def test_pure_diffusion_gap_exact():
    gen = build_advection_diffusion_generator([], 3e-3, 6)
    res = spectrum_and_gap(gen)
    assert abs(res.gap - 4 * np.pi ** 2 * 3e-3) < 1e-12


def test_shear_sector_gap_frozen():
    total, enhancement = shear_sector_gaps(1e-2, 32)
    assert abs(total - 1.157208218604404) < 1e-9
    assert abs(enhancement - (total - 4 * np.pi ** 2 * 1e-2)) < 1e-15


def test_shear_k1_zero_block_is_pure_diffusion():
    # modes with k1 = 0 are untouched by the shear advection; their block
    # must be exactly the diffusion diagonal
    N = 6
    gen = build_advection_diffusion_generator([((0, 1), (1.0, 0.0), "sin")],
                                              1e-2, N)
    M = gen.matrix
    for k2 in range(-N, N + 1):
        i = gen.mode_index(0, k2)
        row = np.array(M[i]); col = np.array(M[:, i])
        expect = 4 * np.pi ** 2 * 1e-2 * k2 ** 2
        assert abs(row[i] - expect) < 1e-14
        row[i] = 0.0; col[i] = 0.0
        assert np.abs(row).max() == 0.0 and np.abs(col).max() == 0.0


def test_gap_sweep_rows():
    tm = TorusMap(CAT, 0.004, SHEAR_SHAPE)
    rows = gap_sweep(tm, [1e-1, 1e-2], N=8, convergence_check=False)
    assert len(rows) == 2
    for row in rows:
        assert row["gap"] > 0 and row["N"] == 8


def test_resonance_convergence_report():
    tm = TorusMap(CAT, 0.004, SHEAR_SHAPE)
    rep = resonance_convergence(tm, [4e-2, 2e-2, 1e-2], region_r0=0.08, N=8,
                                check_truncation=True)
    assert rep["truncation_stable"]
    assert len(rep["max_displacement_per_step"]) == 2
    assert all(c >= 1 for c in rep["counts"])
