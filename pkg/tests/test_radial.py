import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from kgzsim.radial import (
    PhysField,
    RadialGrid,
    SpectralField,
    apply_multiplier,
    besov_norm,
    eta0,
    field_to_csv,
    kg_propagate,
    lebesgue_norm,
    lp_project,
    lp_project_le,
    pointwise_product,
    random_band_limited,
    read_field,
    spectral_l2,
    to_physical,
    to_spectral,
    wave_propagate,
    write_field,
)


def eigenmode(grid: RadialGrid, m: int, amp: complex = 1.0) -> PhysField:
    return PhysField(grid, amp * np.sin(grid.xi[m - 1] * grid.r) / grid.r)


def rel_coeff_err(a: SpectralField, b: SpectralField) -> float:
    return spectral_l2(a - b) / spectral_l2(b)


# ---------------------------------------------------------------------------
# forward transform
# ---------------------------------------------------------------------------

def test_single_eigenmode_diagonalizes(grid):
    c = to_spectral(eigenmode(grid, 1))
    assert abs(c.coeffs[0]) > 0
    assert np.max(np.abs(c.coeffs[1:])) < 1e-12 * abs(c.coeffs[0])


def test_zero_transforms_to_zero(grid):
    z = PhysField(grid, np.zeros(grid.M))
    assert np.all(to_spectral(z).coeffs == 0)


def test_gaussian_against_quadrature_oracle():
    # high-precision quadrature: the relative tolerance at coefficients nine
    # orders below the integrand scale sits at the float64 cancellation floor,
    # which a float64 oracle cannot certify
    from mpmath import mp, mpf, quad as mpquad
    from mpmath import exp as mpexp, sin as mpsin

    mp.dps = 25
    grid = RadialGrid(40.0, 512)
    f = PhysField(grid, np.exp(-grid.r**2))
    c = to_spectral(f)
    scale = np.linalg.norm(c.coeffs)
    pieces = [mpf(p) for p in np.linspace(0.0, 40.0, 33)]
    checked = 0
    for m, xi in enumerate(grid.xi):
        if abs(c.coeffs[m]) <= 1e-10 * scale:
            continue
        checked += 1
        x = mpf(xi)
        oracle = float(mpquad(lambda r: r * mpexp(-r * r) * mpsin(r * x), pieces))
        oracle *= 4.0 * np.pi / xi
        assert abs(c.coeffs[m] - oracle) < 1e-8 * abs(oracle)
    assert checked > 100


# ---------------------------------------------------------------------------
# inverse transform
# ---------------------------------------------------------------------------

def test_delta_coeff_gives_basis_function(grid):
    c = np.zeros(grid.M, dtype=complex)
    c[0] = 1.0
    f = to_physical(SpectralField(grid, c))
    shape = np.sin(grid.xi[0] * grid.r) / grid.r
    ratio = f.values / shape
    assert np.max(np.abs(ratio - ratio[0])) < 1e-12 * abs(ratio[0])


def test_roundtrip_random_band_limited(grid, rng):
    for _ in range(20):
        f = to_physical(random_band_limited(grid, rng))
        back = to_physical(to_spectral(f))
        assert np.max(np.abs(back.values - f.values)) < 1e-12 * np.max(np.abs(f.values))


def test_gaussian_reconstruction_truncation_limited():
    # synthesizing from the continuum coefficients -> sampled Gaussian
    grid = RadialGrid(40.0, 512)
    analytic = SpectralField(grid, np.pi**1.5 * np.exp(-grid.xi**2 / 4.0))
    f = to_physical(analytic)
    target = np.exp(-grid.r**2)
    assert np.max(np.abs(f.values - target)) < 1e-8 * np.max(target)


# ---------------------------------------------------------------------------
# multipliers and propagators
# ---------------------------------------------------------------------------

def test_identity_multiplier(grid, rng):
    c = random_band_limited(grid, rng)
    out = apply_multiplier(c, lambda xi: np.ones_like(xi))
    assert np.array_equal(out.coeffs, c.coeffs)


def test_inverse_multipliers_compose_to_identity(grid, rng):
    c = random_band_limited(grid, rng)
    up = apply_multiplier(c, lambda xi: np.sqrt(1 + xi**2))
    back = apply_multiplier(up, lambda xi: 1.0 / np.sqrt(1 + xi**2))
    assert np.max(np.abs(back.coeffs - c.coeffs)) < 1e-12 * np.max(np.abs(c.coeffs))


def test_nonfinite_multiplier_rejected(grid, rng):
    c = random_band_limited(grid, rng)
    with np.errstate(divide="ignore"):
        with pytest.raises(ValueError, match="not finite"):
            apply_multiplier(c, lambda xi: 1.0 / (xi - xi[3]))


@settings(deadline=None, max_examples=20)
@given(seed=st.integers(0, 10**6), s1=st.floats(-2, 2), s2=st.floats(-2, 2))
def test_multiplier_composition(seed, s1, s2):
    grid = RadialGrid(20.0, 64)
    c = random_band_limited(grid, np.random.default_rng(seed))
    m1 = (1.0 + grid.xi**2) ** s1
    m2 = (1.0 + grid.xi**2) ** s2
    once = apply_multiplier(c, m1 * m2)
    twice = apply_multiplier(apply_multiplier(c, m2), m1)
    scale = np.max(np.abs(once.coeffs))
    assert np.max(np.abs(once.coeffs - twice.coeffs)) <= 4e-16 * scale


def test_propagators_at_zero_time(grid, rng):
    c = random_band_limited(grid, rng)
    assert np.array_equal(kg_propagate(c, 0.0).coeffs, c.coeffs)
    assert np.array_equal(wave_propagate(c, 0.0, 0.5).coeffs, c.coeffs)


def test_kg_phase_on_single_mode(grid):
    c = to_spectral(eigenmode(grid, 1))
    t = 3.7
    out = kg_propagate(c, t)
    phase = np.exp(1j * t * np.sqrt(1.0 + grid.xi[0] ** 2))
    assert abs(out.coeffs[0] - phase * c.coeffs[0]) < 1e-13 * abs(c.coeffs[0])


def test_propagator_unitarity(grid, rng):
    c = random_band_limited(grid, rng)
    n0 = spectral_l2(c)
    assert abs(spectral_l2(kg_propagate(c, 7.3)) - n0) < 1e-13 * n0
    assert abs(spectral_l2(wave_propagate(c, 7.3, 1.8)) - n0) < 1e-13 * n0


def test_propagate_forward_backward(grid, rng):
    c = random_band_limited(grid, rng)
    back = kg_propagate(kg_propagate(c, 11.0), -11.0)
    assert np.max(np.abs(back.coeffs - c.coeffs)) < 1e-12 * np.max(np.abs(c.coeffs))


# ---------------------------------------------------------------------------
# Littlewood-Paley projectors
# ---------------------------------------------------------------------------

def test_bump_profile():
    assert eta0(0.3) == 1.0
    assert eta0(1.0) == 1.0
    assert eta0(2.0) == 0.0
    assert 0.0 < eta0(1.5) < 1.0


def test_partition_of_unity(grid, rng):
    f = random_band_limited(grid, rng, (8, 200))
    total = np.zeros(grid.M, dtype=complex)
    for k in grid.resolved_k:
        total += lp_project(f, k).coeffs
    assert spectral_l2(SpectralField(grid, total - f.coeffs)) < 1e-10 * spectral_l2(f)


def test_block_support(grid):
    # spectral support inside [2^(k-1), 2^k] only meets chi_j for j in {k-1, k, k+1}
    k = 3
    sel = (grid.xi >= 2.0 ** (k - 1)) & (grid.xi <= 2.0**k)
    coeffs = np.where(sel, 1.0, 0.0).astype(complex)
    f = SpectralField(grid, coeffs)
    for j in grid.resolved_k:
        block = lp_project(f, j)
        if j < k - 1 or j > k + 1:
            assert spectral_l2(block) == 0.0


def test_lowpass_plus_tail_is_identity(grid, rng):
    f = random_band_limited(grid, rng, (8, 200))
    k = 1
    total = lp_project_le(f, k).coeffs.copy()
    for j in range(k + 1, grid.k_max + 1):
        total += lp_project(f, j).coeffs
    assert spectral_l2(SpectralField(grid, total - f.coeffs)) < 1e-10 * spectral_l2(f)


def test_out_of_band_projection_is_zero(grid, rng):
    f = random_band_limited(grid, rng)
    assert spectral_l2(lp_project(f, grid.k_max + 3)) == 0.0
    assert spectral_l2(lp_project(f, grid.k_min - 3)) == 0.0


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def test_parseval_on_eigenmode(grid):
    f = eigenmode(grid, 5, amp=0.7)
    phys = lebesgue_norm(f, 2.0)
    spec = spectral_l2(to_spectral(f))
    assert abs(phys - spec) < 1e-10 * phys


def test_gaussian_l2_closed_form():
    grid = RadialGrid(40.0, 512)
    f = PhysField(grid, np.exp(-grid.r**2))
    oracle, _ = quad(lambda r: 4.0 * np.pi * r * r * np.exp(-2.0 * r * r), 0.0, 40.0)
    assert abs(lebesgue_norm(f, 2.0) - np.sqrt(oracle)) < 1e-6
    assert abs(np.sqrt(oracle) - (np.pi / 2.0) ** 0.75) < 1e-12


def test_norm_rejects_p_below_one(grid):
    f = eigenmode(grid, 1)
    with pytest.raises(ValueError, match="p >= 1"):
        lebesgue_norm(f, 0.5)
    with pytest.raises(ValueError, match="p >= 1"):
        besov_norm(f, 0.0, 0.5)


def test_sup_norm(grid):
    f = PhysField(grid, np.linspace(0, 1, grid.M))
    assert lebesgue_norm(f, np.inf) == 1.0


def test_besov_zero_regularity_matches_l2_on_flat_blocks():
    # R = 16 pi puts xi = 1, 2, 4 exactly on the grid, where precisely one
    # dyadic bump is active and equal to one
    grid = RadialGrid(16.0 * np.pi, 256)
    coeffs = np.zeros(grid.M, dtype=complex)
    for m, a in ((16, 1.0), (32, 0.5 - 0.25j), (64, -0.25)):
        coeffs[m - 1] = a
    f = SpectralField(grid, coeffs)
    assert abs(besov_norm(f, 0.0, 2.0, homogeneous=True) - spectral_l2(f)) < 1e-6 * spectral_l2(f)


def test_besov_homogeneity(grid, rng):
    f = random_band_limited(grid, rng, (4, 200))
    one = besov_norm(f, 0.5, 3.0)
    two = besov_norm(2.0 * f, 0.5, 3.0)
    assert abs(two - 2.0 * one) < 1e-12 * two


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def test_dealiased_product_semantics(grid, rng):
    # products of radial sine series carry an algebraic spectral tail (the
    # 1/r^2 factor), so truncation removes a small but genuine remainder
    f = to_physical(random_band_limited(grid, rng, (1, 40)))
    g = to_physical(random_band_limited(grid, rng, (1, 40)))
    plain = pointwise_product(f, g)
    deal = pointwise_product(f, g, dealiased=True)
    cutoff = (2.0 / 3.0) * grid.xi[-1]
    cd = to_spectral(deal).coeffs
    assert np.max(np.abs(cd[grid.xi > cutoff])) < 1e-13 * np.max(np.abs(cd))
    num = spectral_l2(to_spectral(deal) - to_spectral(plain))
    assert num < 1e-3 * spectral_l2(to_spectral(plain))


# ---------------------------------------------------------------------------
# snapshot files
# ---------------------------------------------------------------------------

def test_field_file_roundtrip(tmp_path, grid, rng):
    f = to_physical(random_band_limited(grid, rng))
    write_field(tmp_path / "f.fld", f)
    back = read_field(tmp_path / "f.fld")
    assert isinstance(back, PhysField)
    assert back.grid.key() == grid.key()
    assert np.array_equal(back.values, f.values)

    c = to_spectral(f)
    write_field(tmp_path / "c.fld", c)
    back_c = read_field(tmp_path / "c.fld")
    assert isinstance(back_c, SpectralField)
    assert np.array_equal(back_c.coeffs, c.coeffs)


def test_field_csv_export(tmp_path, grid, rng):
    f = to_physical(random_band_limited(grid, rng))
    field_to_csv(tmp_path / "f.csv", f)
    lines = (tmp_path / "f.csv").read_text().strip().splitlines()
    assert lines[0] == "r,re,im"
    assert len(lines) == grid.M + 1
    r0, re0, im0 = (float(x) for x in lines[1].split(","))
    assert r0 == grid.r[0]
    assert re0 == f.values[0].real and im0 == f.values[0].imag
