import math

import numpy as np
import pytest

from warpdirac import (ConfigurationError, Family, GridTooCoarseError,
                       MetricProfile, RadialGrid, assemble_dirac,
                       assemble_kg, check_admissible, factorization_check,
                       flat_reference_operator, norm_equivalence_check, sigma,
                       sigma_n, verify_square)
from warpdirac.operators import sigma_log_derivative_bound, weighted_laplacian_operator

FLAT = MetricProfile(Family.FLAT)
SINH = MetricProfile(Family.SINH)
AF001 = MetricProfile(Family.ASYMPTOTICALLY_FLAT, epsilon=0.01)

GRID = RadialGrid(40.0, 512)


def test_grid_nodes_offset():
    g = RadialGrid(10.0, 8)
    assert g.dr == 1.25
    assert np.allclose(g.nodes, [0.625 + 1.25 * i for i in range(8)])
    assert np.all(g.nodes > 0.0)
    assert np.all(np.diff(g.nodes) > 0.0)


def test_sigma_flat():
    s, sp = sigma(FLAT, 3.7)
    assert s == 1.0 and sp == 0.0


def test_sigma_sinh_origin():
    s, sp = sigma(SINH, 0.0)
    assert s == 1.0
    assert sp == 0.0  # phi''(0) = sinh 0 = 0


def test_sigma_sinh_at_one():
    s, sp = sigma(SINH, 1.0)
    assert s == pytest.approx(1.0 / math.sinh(1.0), rel=1e-14)
    expected_sp = (1.0 - math.cosh(1.0) / math.sinh(1.0)) / math.sinh(1.0)
    assert sp == pytest.approx(expected_sp, rel=1e-14)
    # cross-check the derivative by central differences
    h = 1e-6
    s_hi, _ = sigma(SINH, 1.0 + h)
    s_lo, _ = sigma(SINH, 1.0 - h)
    assert sp == pytest.approx((s_hi - s_lo) / (2.0 * h), abs=1e-9)


def test_sigma_af_origin_slope():
    # phi''(0) = 2 eps for alpha = 1, so sigma'(0) = -eps
    _, sp = sigma(AF001, 0.0)
    assert sp == pytest.approx(-0.01, rel=1e-12)


def test_sigma_n_power():
    s, _ = sigma(SINH, 2.0)
    assert sigma_n(SINH, 2.0, 5) == pytest.approx(s**2, rel=1e-14)


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarseError):
        assemble_dirac(FLAT, 1.0, 0.0, 3, RadialGrid(40.0, 8))


def test_dirac_exactly_symmetric():
    for prof in (FLAT, AF001, SINH):
        op = assemble_dirac(prof, 2.0, 0.5, 3, GRID)
        assert op.hermiticity_defect() == 0.0


def test_kg_flat_potentials_exact():
    # mu = 1: V^2 - V' = 2/r^2 and V^2 + V' = 0 (up to one ulp of 1/r^2)
    km = assemble_kg(FLAT, 1.0, 0.0, 3, -1, GRID)
    kp = assemble_kg(FLAT, 1.0, 0.0, 3, +1, GRID)
    lap = flat_reference_operator(3, GRID)  # n=3: plain -d2/dr2
    r = GRID.nodes
    assert np.allclose(np.diag(km.matrix - lap.matrix), 2.0 / r**2, rtol=1e-13)
    assert np.max(np.abs(np.diag(kp.matrix - lap.matrix)) * r**2) < 1e-11


def test_massless_spectrum_symmetric():
    op = assemble_dirac(FLAT, 1.0, 0.0, 3, GRID)
    w, _ = op.eigh()
    assert np.max(np.abs(w + w[::-1])) <= 1e-9 * np.max(np.abs(w))


def test_mass_gap():
    op = assemble_dirac(FLAT, 1.0, 1.0, 3, GRID)
    w, _ = op.eigh()
    assert np.min(np.abs(w)) >= 1.0 - 5.0 * GRID.dr


def test_mu_sign_flip_unitary_equivalence():
    w_pos = np.sort(np.abs(np.linalg.eigvalsh(assemble_dirac(FLAT, 1.0, 0.0, 3, GRID).matrix)))
    w_neg = np.sort(np.abs(np.linalg.eigvalsh(assemble_dirac(FLAT, -1.0, 0.0, 3, GRID).matrix)))
    assert np.max(np.abs(w_pos - w_neg)) <= 1e-9 * w_pos[-1]


def test_kg_positive_when_admissible():
    for prof, mu in ((FLAT, 1.0), (AF001, 2.0)):
        assert check_admissible(prof, mu).admissible
        for sign in (+1, -1):
            k = assemble_kg(prof, mu, 0.0, 3, sign, GRID)
            w = np.linalg.eigvalsh(k.matrix)
            assert w[0] >= -1e-8 * np.linalg.norm(k.matrix)


def test_verify_square_parameter_mismatch():
    h = assemble_dirac(FLAT, 1.0, 0.0, 3, GRID)
    km = assemble_kg(FLAT, 1.0, 0.0, 3, -1, GRID)
    kp_wrong = assemble_kg(FLAT, 2.0, 0.0, 3, +1, GRID)
    with pytest.raises(ConfigurationError):
        verify_square(h, km, kp_wrong)
    with pytest.raises(ConfigurationError):
        verify_square(h, kp_wrong, km)


def test_verify_square_convergence():
    res = []
    for n_cells in (256, 512, 1024):
        g = RadialGrid(40.0, n_cells)
        h = assemble_dirac(FLAT, 1.0, 0.0, 3, g)
        km = assemble_kg(FLAT, 1.0, 0.0, 3, -1, g)
        kp = assemble_kg(FLAT, 1.0, 0.0, 3, +1, g)
        res.append(verify_square(h, km, kp))
    assert res[0] / res[1] >= 3.5
    assert res[1] / res[2] >= 3.5


def test_verify_square_mass_enters_exactly():
    # m^2 I appears identically on both sides, so the defect matrix
    # h^2 - diag(K-, K+) is independent of the mass.
    defects = []
    for m in (0.0, 2.0):
        h = assemble_dirac(FLAT, 1.0, m, 3, GRID).matrix
        km = assemble_kg(FLAT, 1.0, m, 3, -1, GRID).matrix
        kp = assemble_kg(FLAT, 1.0, m, 3, +1, GRID).matrix
        nn = GRID.n_cells
        block = np.zeros_like(h)
        block[:nn, :nn] = km
        block[nn:, nn:] = kp
        defects.append(h @ h - block)
    assert np.max(np.abs(defects[0] - defects[1])) <= 1e-12 * np.max(np.abs(defects[0]))


def test_factorization_convergence_and_mass_independence():
    res = [factorization_check(FLAT, 1.0, 0.0, 3, RadialGrid(40.0, k))
           for k in (256, 512, 1024)]
    for i in (0, 1):
        assert res[i][0] / res[i + 1][0] >= 3.5
        assert res[i][1] / res[i + 1][1] >= 3.5
    with_mass = factorization_check(FLAT, 1.0, 3.0, 3, RadialGrid(40.0, 256))
    assert with_mass[0] == pytest.approx(res[0][0], abs=1e-12)
    assert with_mass[1] == pytest.approx(res[0][1], abs=1e-12)


def test_factorization_sign_swap_under_mu_flip():
    rm, rp = factorization_check(FLAT, 2.0, 0.0, 3, GRID)
    rm_neg, rp_neg = factorization_check(FLAT, -2.0, 0.0, 3, GRID)
    # V -> -V swaps the two factorization channels
    assert rm == pytest.approx(rp_neg, rel=1e-10)
    assert rp == pytest.approx(rm_neg, rel=1e-10)


def test_norm_equivalence_flat_is_exact():
    worst, worst_inv = norm_equivalence_check(FLAT, 3, 0.7, trials=20, grid=GRID)
    assert worst == pytest.approx(1.0, abs=1e-10)
    assert worst_inv == pytest.approx(1.0, abs=1e-10)


def test_norm_equivalence_s_zero_isometry():
    for prof in (AF001, SINH):
        worst, worst_inv = norm_equivalence_check(prof, 3, 0.0, trials=10, grid=GRID)
        assert worst == pytest.approx(1.0, abs=1e-8)
        assert worst_inv == pytest.approx(1.0, abs=1e-8)


def test_norm_equivalence_af_bound():
    worst, worst_inv = norm_equivalence_check(AF001, 3, 1.0, trials=40, grid=GRID)
    assert max(worst, worst_inv) <= 1.02


def test_norm_equivalence_exponent_range():
    from warpdirac.errors import ConfigurationError as CfgErr
    with pytest.raises(CfgErr):
        norm_equivalence_check(FLAT, 3, 1.5, trials=1, grid=GRID)


def test_sigma_log_derivative_bounds():
    assert sigma_log_derivative_bound(FLAT) == 0.0
    # sup |1/r - coth r| = 1, attained in the limit r -> infinity
    assert sigma_log_derivative_bound(SINH) == pytest.approx(1.0, abs=1e-9)
    assert sigma_log_derivative_bound(AF001) == pytest.approx(0.01, abs=1e-6)


def test_weighted_laplacian_flat_matches_reference():
    a = weighted_laplacian_operator(FLAT, 4, GRID)
    b = flat_reference_operator(4, GRID)
    assert np.array_equal(a.matrix, b.matrix)
