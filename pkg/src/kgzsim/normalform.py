"""Bilinear normal-form multipliers and transformed-equation residuals.

The quadratic terms of the first-order system are traded, on their
non-resonant high-low support, for boundary and cubic terms by integrating
the Duhamel integral by parts against the non-vanishing resonance phase.
The workhorse is a bilinear operator with a radial symbol,

    B[w](f, g)(xi) = (2 pi)^{-3} * 2 pi *
        int_0^inf int_{-1}^{1} w(xi, |eta|, c) fhat(|xi - eta|) ghat(|eta|)
        |eta|^2 dc d|eta|,

evaluated by Gauss-Legendre quadrature in the angle and trapezoid over the
grid frequencies, with linear interpolation of fhat at off-grid radii.  The
(2 pi)^{-3} is the convolution-theorem constant for the transform
normalization used here, so the weight-one symbol reproduces the pointwise
product f * g.

The division by the resonance phase is only applied on a support that stays
away from the phase's zero set: the dyadic high-low blocks outside the
resonant annulus, further multiplied by a smooth excision of the annulus
core [c - delta/2, c + delta/2] in the high-factor radius (block bumps spill
across the annulus edge, so the block selection alone would not keep the
symbol bounded).  The residual checker subtracts exactly this guarded piece
from the full product, which keeps the transformed integral identity exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import simpson

from .radial import (
    PhysField,
    RadialGrid,
    SpectralField,
    as_spectral,
    besov_norm,
    chi_k,
    chi_le,
    eta0,
    lebesgue_norm,
    pointwise_product,
    sobolev_norm,
    spectral_l2,
    to_physical,
    to_spectral,
)
from .resonance import InteractionTag, ResonanceParams, decompose_bilinear
from .kgz import Trajectory

SYMBOL_KINDS = ("plain", "omega", "omega_tilde", "xl_mask", "xl_lx_mask")


@dataclass(frozen=True)
class BilinearSymbol:
    """Radial bilinear weight selected by ``kind``.

    plain        -- weight 1 (convolution / product);
    omega        -- guarded XL cutoff divided by -<xi> + alpha|xi-eta| + <eta>;
    omega_tilde  -- guarded XL + LX cutoff divided by <xi-eta> - <eta> - alpha|xi|
                    (pairs fhat(xi-eta) with the conjugate of ghat);
    xl_mask      -- the guarded XL cutoff alone;
    xl_lx_mask   -- the guarded XL + LX cutoff alone.
    """

    kind: str
    params: ResonanceParams | None = None
    guard_fraction: float = 0.5

    def __post_init__(self):
        if self.kind not in SYMBOL_KINDS:
            raise ValueError(f"kind must be one of {SYMBOL_KINDS}, got {self.kind!r}")
        if self.kind != "plain" and self.params is None:
            raise ValueError(f"symbol kind {self.kind!r} needs resonance parameters")
        if not 0.0 < self.guard_fraction < 1.0:
            raise ValueError("guard_fraction must lie in (0, 1)")

    @property
    def conjugates_second(self) -> bool:
        return self.kind in ("omega_tilde", "xl_lx_mask")


def annulus_guard(u: NDArray, params: ResonanceParams, fraction: float = 0.5) -> NDArray:
    """Smooth complement bump: 0 on [c - f*delta, c + f*delta], 1 off the annulus."""
    d = np.abs(np.asarray(u, dtype=float) - params.c_alpha)
    return 1.0 - eta0(d / (fraction * params.delta_alpha))


def _xl_blocks(params: ResonanceParams, ks: Sequence[int]) -> list[int]:
    return [k for k in ks if abs(2.0**k - params.c_alpha) > params.delta_alpha]


def _symbol_weight(
    sym: BilinearSymbol,
    grid: RadialGrid,
    xi_out: NDArray,
    u: NDArray,
    rho: NDArray,
) -> NDArray:
    """Evaluate the weight on broadcastable (xi_out, u, rho) arrays."""
    if sym.kind == "plain":
        return np.ones(np.broadcast_shapes(xi_out.shape, u.shape, rho.shape))

    p = sym.params
    ks = list(grid.resolved_k)
    xl = _xl_blocks(p, ks)
    ka = p.k_alpha

    # eta0 planes over u are the dominant cost; compute each scale once
    scales = sorted({k for k in xl} | {k - 1 for k in xl} | {k - ka for k in xl})
    planes = {j: eta0(u / 2.0**j) for j in scales}

    mask_xl = np.zeros(np.broadcast_shapes(u.shape, rho.shape))
    for k in xl:
        mask_xl = mask_xl + (planes[k] - planes[k - 1]) * chi_le(rho, k - ka)
    mask_xl = mask_xl * annulus_guard(u, p, sym.guard_fraction)

    if sym.kind in ("omega", "xl_mask"):
        num = mask_xl
    else:
        mask_lx = np.zeros_like(mask_xl)
        for k in xl:
            mask_lx = mask_lx + planes[k - ka] * chi_k(rho, k)
        num = mask_xl + mask_lx

    if sym.kind in ("xl_mask", "xl_lx_mask"):
        return np.broadcast_to(num, np.broadcast_shapes(num.shape, xi_out.shape)).copy()

    if sym.kind == "omega":
        den = -np.sqrt(1.0 + xi_out**2) + p.alpha * u + np.sqrt(1.0 + rho**2)
    else:  # omega_tilde
        den = np.sqrt(1.0 + u**2) - np.sqrt(1.0 + rho**2) - p.alpha * xi_out
    num, den = np.broadcast_arrays(num, den)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=num != 0.0)
    return out


# ---------------------------------------------------------------------------
# quadrature operator
# ---------------------------------------------------------------------------

_CACHE_LIMIT = 2**24          # entries; larger kernels are re-evaluated per apply
_F64_LIMIT = 2**22            # entries; larger cached kernels drop to float32
_MATRIX_LIMIT = 4 * 10**7     # M^2 (M+2) above this skips the dense-matrix fast path
_geometry_cache: dict = {}
_operator_cache: dict = {}


def clear_bilinear_cache() -> None:
    _geometry_cache.clear()
    _operator_cache.clear()


def _interp_tables(grid: RadialGrid, u: NDArray, dtype) -> tuple[NDArray, NDArray]:
    """Index/fraction tables for linear interpolation at radii u.

    Index M points at the zero pad (outside [xi_1, xi_M]).
    """
    xi1, xiM, dxi = grid.xi[0], grid.xi[-1], grid.dxi
    pos = (u - xi1) / dxi
    idx = np.floor(pos).astype(np.int32)
    frc = (pos - idx).astype(dtype)
    inside = (u >= xi1) & (u <= xiM)
    idx = np.clip(idx, 0, grid.M - 1)
    np.minimum(frc, 1.0, out=frc)
    idx[~inside] = grid.M
    frc[~inside] = 0.0
    return idx, frc


class BilinearOperator:
    """Bilinear quadrature bound to (grid, symbol, angular order).

    Output coefficients at every grid frequency cost O(M^2 Q); the static
    weight kernel is cached when it fits, so repeated applies (Duhamel
    residuals, estimate sweeps) are cheap.  Summation order is fixed, so
    results are bit-identical between runs.
    """

    def __init__(self, grid: RadialGrid, symbol: BilinearSymbol, n_angular: int = 64, m_chunk: int = 64):
        self.grid = grid
        self.symbol = symbol
        self.n_angular = int(n_angular)
        self.m_chunk = int(m_chunk)
        nodes, weights = np.polynomial.legendre.leggauss(self.n_angular)
        self._cos = nodes
        self._glw = weights
        size = grid.M * grid.M * self.n_angular
        self._dtype = np.float64 if size <= _F64_LIMIT else np.float32
        self._cache_kernel = size <= _CACHE_LIMIT
        rho = grid.xi
        trap = np.ones(grid.M)
        trap[0] = trap[-1] = 0.5
        # (2 pi)^{-3} * 2 pi = 1/(4 pi^2), folded with the radial measure
        self._base = (grid.dxi / (4.0 * np.pi**2)) * trap * rho**2
        self.max_abs_weight = 0.0
        self._W0: NDArray | None = None  # kernel * (1 - frac), kernel * frac
        self._W1: NDArray | None = None
        self._IDX: NDArray | None = None
        self._T: NDArray | None = None   # angular axis contracted: (M, M+2, M) float32
        if self._cache_kernel:
            self._build()

    # -- kernel construction -------------------------------------------------

    def _chunk_geometry(self, m_slice: slice) -> tuple[NDArray, NDArray, NDArray]:
        xi_out = self.grid.xi[m_slice][:, None, None]
        rho = self.grid.xi[None, :, None]
        cos = self._cos[None, None, :]
        u = np.sqrt(np.maximum(xi_out**2 + rho**2 - 2.0 * xi_out * rho * cos, 0.0))
        return xi_out, rho, u

    def _chunk_kernel(self, m_slice: slice) -> tuple[NDArray, NDArray, NDArray]:
        xi_out, rho, u = self._chunk_geometry(m_slice)
        w = _symbol_weight(self.symbol, self.grid, xi_out, u, rho)
        if not np.all(np.isfinite(w)):
            raise RuntimeError(
                f"bilinear symbol {self.symbol.kind!r} is not finite on its support"
            )
        self.max_abs_weight = max(self.max_abs_weight, float(np.abs(w).max(initial=0.0)))
        G = (w * (self._base[None, :, None] * self._glw[None, None, :])).astype(self._dtype)
        idx, frc = _interp_tables(self.grid, u, self._dtype)
        return G, idx, frc

    def _build(self) -> None:
        M, Q = self.grid.M, self.n_angular
        self._W0 = np.empty((M, M, Q), dtype=self._dtype)
        self._W1 = np.empty((M, M, Q), dtype=self._dtype)
        key = (self.grid.key(), Q)
        idx_full = _geometry_cache.get(key)
        own_idx = idx_full is None
        if own_idx:
            idx_full = np.empty((M, M, Q), dtype=np.int32)
        for lo in range(0, M, self.m_chunk):
            sl = slice(lo, min(lo + self.m_chunk, M))
            G, idx, frc = self._chunk_kernel(sl)
            self._W0[sl] = G * (1.0 - frc)
            self._W1[sl] = G * frc
            if own_idx:
                idx_full[sl] = idx
        self._IDX = idx_full
        if own_idx:
            _geometry_cache[key] = idx_full  # shared across symbols on this grid

    # -- application ---------------------------------------------------------

    def _build_matrix(self) -> None:
        """Contract the angular axis into per-output-frequency matrices.

        T[m, i, j] collects the interpolation weight of input-f node i against
        input-g node j for output m; batched applies then reduce to two real
        matrix products, amortizing one kernel read over many snapshots.
        """
        M = self.grid.M
        self._T = np.zeros((M, M + 2, M), dtype=np.float32)
        jj = np.broadcast_to(np.arange(M)[:, None], (M, self.n_angular))
        size = (M + 2) * M
        for lo in range(0, M, self.m_chunk):
            sl = slice(lo, min(lo + self.m_chunk, M))
            if self._W0 is not None:
                W0, W1, idx = self._W0[sl], self._W1[sl], self._IDX[sl]
            else:
                G, idx, frc = self._chunk_kernel(sl)
                W0, W1 = G * (1.0 - frc), G * frc
            for local in range(idx.shape[0]):
                lin = idx[local].astype(np.intp) * M + jj
                acc = np.bincount(lin.ravel(), weights=W0[local].ravel(), minlength=size)
                acc += np.bincount(lin.ravel() + M, weights=W1[local].ravel(), minlength=size)
                self._T[lo + local] = acc.reshape(M + 2, M).astype(np.float32)

    def apply_batch(self, fhats: NDArray, ghats: NDArray) -> NDArray:
        """Apply to a stack of coefficient pairs; shapes (S, M) -> (S, M)."""
        fhats = np.atleast_2d(fhats)
        ghats = np.atleast_2d(ghats)
        S, M = fhats.shape
        g_arr = np.conj(ghats) if self.symbol.conjugates_second else ghats
        if self._T is None and M * M * (M + 2) <= _MATRIX_LIMIT and self._cache_kernel:
            self._build_matrix()
        out = np.empty((S, M), dtype=np.complex128)
        fpad = np.zeros((S, M + 2), dtype=np.complex128)
        fpad[:, :M] = fhats
        if self._T is not None:
            T2 = self._T.reshape(-1, M)
            for lo in range(0, S, 128):
                sel = slice(lo, min(lo + 128, S))
                Zr = (T2 @ g_arr[sel].real.astype(np.float32).T).reshape(M, M + 2, -1)
                Zi = (T2 @ g_arr[sel].imag.astype(np.float32).T).reshape(M, M + 2, -1)
                fr = fpad[sel].real.astype(np.float32)
                fi = fpad[sel].imag.astype(np.float32)
                re = np.einsum("mis,si->sm", Zr, fr) - np.einsum("mis,si->sm", Zi, fi)
                im = np.einsum("mis,si->sm", Zr, fi) + np.einsum("mis,si->sm", Zi, fr)
                out[sel] = re + 1j * im
            return out
        # chunk-outer loop so each kernel slab is read once per batch
        for lo in range(0, M, self.m_chunk):
            sl = slice(lo, min(lo + self.m_chunk, M))
            if self._W0 is not None:
                W0, W1, idx = self._W0[sl], self._W1[sl], self._IDX[sl]
            else:
                G, idx, frc = self._chunk_kernel(sl)
                W0, W1 = G * (1.0 - frc), G * frc
            for s in range(S):
                row = (W0 * fpad[s][idx] + W1 * fpad[s][idx + 1]).sum(axis=2)
                out[s, sl] = row @ g_arr[s]
        return out

    def apply_coeffs(self, fhat: NDArray, ghat: NDArray) -> NDArray:
        """Output coefficients of B[w](f, g) from input coefficient arrays."""
        return self.apply_batch(fhat[None, :], ghat[None, :])[0]

    def apply(self, f, g) -> PhysField:
        cf, cg = as_spectral(f), as_spectral(g)
        out = self.apply_coeffs(cf.coeffs, cg.coeffs)
        return to_physical(SpectralField(self.grid, out))


def get_operator(grid: RadialGrid, symbol: BilinearSymbol, n_angular: int = 64) -> BilinearOperator:
    key = (grid.key(), symbol, n_angular)
    op = _operator_cache.get(key)
    if op is None:
        op = BilinearOperator(grid, symbol, n_angular)
        _operator_cache[key] = op
    return op


def bilinear_apply(sym: BilinearSymbol, f, g, n_angular: int = 64) -> PhysField:
    """Apply the bilinear operator with symbol ``sym`` to radial fields f, g."""
    grid = f.grid
    if grid.key() != g.grid.key():
        raise ValueError("fields live on different grids")
    return get_operator(grid, sym, n_angular).apply(f, g)


def dense_bilinear_reference(
    sym: BilinearSymbol,
    f,
    g,
    refine: int = 4,
    n_angular: int = 256,
    rho_max: float | None = None,
) -> PhysField:
    """Straightforward dense-quadrature evaluation, used as an oracle.

    Uniform radial nodes at ``refine`` times the grid density (optionally
    truncated at ``rho_max`` when ghat is band-limited) and a ``n_angular``
    point Gauss-Legendre rule; both inputs are linearly interpolated.
    """
    grid = f.grid
    cf, cg = as_spectral(f), as_spectral(g)
    g_arr = np.conj(cg.coeffs) if sym.conjugates_second else cg.coeffs
    g_field = SpectralField(grid, g_arr)
    top = grid.xi[-1] if rho_max is None else min(rho_max, grid.xi[-1])
    n_r = int(np.ceil(refine * top / grid.dxi))
    rho = np.linspace(0.0, top, n_r + 1)[1:]
    drho = rho[1] - rho[0]
    trap = np.ones_like(rho)
    trap[-1] = 0.5
    nodes, weights = np.polynomial.legendre.leggauss(n_angular)
    gv = g_field.sample_at(rho)
    out = np.empty(grid.M, dtype=np.complex128)
    for m, xm in enumerate(grid.xi):
        u = np.sqrt(np.maximum(xm**2 + rho[:, None] ** 2 - 2.0 * xm * rho[:, None] * nodes[None, :], 0.0))
        w = _symbol_weight(sym, grid, np.array(xm)[None, None], u, rho[:, None])
        fv = cf.sample_at(u.ravel()).reshape(u.shape)
        kern = w * fv * weights[None, :]
        out[m] = (drho / (4.0 * np.pi**2)) * np.sum(kern.sum(axis=1) * gv * rho**2 * trap)
    return to_physical(SpectralField(grid, out))


# ---------------------------------------------------------------------------
# boundary and cubic terms
# ---------------------------------------------------------------------------

def _inv_bracket(c: SpectralField) -> SpectralField:
    return SpectralField(c.grid, c.coeffs / np.sqrt(1.0 + c.grid.xi**2))


def _times_d(c: SpectralField) -> SpectralField:
    return SpectralField(c.grid, c.coeffs * c.grid.xi)


def boundary_term_U(N: PhysField, U: PhysField, params: ResonanceParams, n_angular: int = 64) -> PhysField:
    """<D>^{-1} Omega(N, U): the boundary correction of the transformed U equation."""
    sym = BilinearSymbol("omega", params)
    out = to_spectral(bilinear_apply(sym, N, U, n_angular))
    return to_physical(_inv_bracket(out))


def boundary_term_N(U: PhysField, params: ResonanceParams, n_angular: int = 64) -> PhysField:
    """alpha * D * OmegaTilde(U, U): the boundary correction of the transformed N equation."""
    sym = BilinearSymbol("omega_tilde", params)
    out = to_spectral(bilinear_apply(sym, U, U, n_angular))
    return to_physical(SpectralField(out.grid, params.alpha * out.grid.xi * out.coeffs))


def cubic_terms(N: PhysField, U: PhysField, params: ResonanceParams, n_angular: int = 64) -> tuple[PhysField, PhysField, PhysField]:
    """The three cubic compositions produced by the normal form.

    Omega(D|U|^2, U), Omega(N, <D>^{-1}(N U)), OmegaTilde(<D>^{-1}(N U), U);
    interior products are dealiased.
    """
    om = BilinearSymbol("omega", params)
    omt = BilinearSymbol("omega_tilde", params)
    usq = pointwise_product(U, U.conj(), dealiased=True)
    d_usq = to_physical(_times_d(to_spectral(usq)))
    nu = pointwise_product(N, U, dealiased=True)
    aux = to_physical(_inv_bracket(to_spectral(nu)))
    return (
        bilinear_apply(om, d_usq, U, n_angular),
        bilinear_apply(om, N, aux, n_angular),
        bilinear_apply(omt, aux, U, n_angular),
    )


# ---------------------------------------------------------------------------
# Duhamel residuals of the transformed integral equations
# ---------------------------------------------------------------------------

def duhamel_residual(
    traj: Trajectory,
    params: ResonanceParams | None,
    which: str = "U",
    n_angular: int = 64,
) -> float:
    """Relative L^2 mismatch of the transformed integral equation at the final time.

    The right-hand side combines the free term, the boundary corrections at 0
    and t, the two cubic Duhamel integrals, and the untransformed remainder
    (the full quadratic term minus its guarded non-resonant part), each
    propagated exactly and integrated over the stored snapshots by composite
    Simpson.  Requires a ``simplified``-model trajectory without dealiasing
    and alpha < 1; a ``linear`` trajectory is compared against the free term
    alone.
    """
    if which not in ("U", "N"):
        raise ValueError("which must be 'U' or 'N'")
    cfg = traj.config
    grid = cfg.grid
    times = traj.times
    t = float(times[-1])
    lxi = np.sqrt(1.0 + grid.xi**2)
    xi = grid.xi

    last = traj.states[-1]
    cU_t = to_spectral(last.U).coeffs
    cN_t = to_spectral(last.N).coeffs
    target = cU_t if which == "U" else cN_t
    den = spectral_l2(SpectralField(grid, target))

    if cfg.model == "linear":
        first = traj.states[0]
        c0 = to_spectral(first.U if which == "U" else first.N).coeffs
        phase = np.exp(1j * t * lxi) if which == "U" else np.exp(1j * cfg.alpha * t * xi)
        num = spectral_l2(SpectralField(grid, phase * c0 - target))
        return 0.0 if den == 0.0 else num / den

    if cfg.model != "simplified":
        raise ValueError("transformed-equation residuals require a simplified-model trajectory")
    if cfg.alpha >= 1.0:
        raise ValueError("the transformed equations are assembled for alpha < 1")
    if cfg.dealias:
        raise ValueError("residual checking needs a trajectory run without dealiasing")
    if params is None or abs(params.alpha - cfg.alpha) > 0.0:
        raise ValueError("resonance parameters must match the trajectory's alpha")
    if len(times) < 3:
        raise ValueError("need at least three snapshots for Simpson quadrature")

    alpha = cfg.alpha
    om = get_operator(grid, BilinearSymbol("omega", params), n_angular)
    om_mask = get_operator(grid, BilinearSymbol("xl_mask", params), n_angular)
    omt = get_operator(grid, BilinearSymbol("omega_tilde", params), n_angular)
    omt_mask = get_operator(grid, BilinearSymbol("xl_lx_mask", params), n_angular)

    n_t = len(times)
    cU_all = np.empty((n_t, grid.M), dtype=np.complex128)
    cN_all = np.empty_like(cU_all)
    c_nu_all = np.empty_like(cU_all)
    c_uu_all = np.empty_like(cU_all)
    for i, state in enumerate(traj.states):
        cU_all[i] = to_spectral(state.U).coeffs
        cN_all[i] = to_spectral(state.N).coeffs
        c_nu_all[i] = to_spectral(PhysField(grid, state.N.values * state.U.values)).coeffs
        c_uu_all[i] = to_spectral(PhysField(grid, state.U.values * np.conj(state.U.values))).coeffs
    aux_all = c_nu_all / lxi  # <D>^{-1}(N U)

    if which == "U":
        cubic1 = om.apply_batch(xi * c_uu_all, cU_all)
        cubic2 = om.apply_batch(cN_all, aux_all)
        rest = c_nu_all - om_mask.apply_batch(cN_all, cU_all)
        total = (-1j / lxi) * (alpha * cubic1 + cubic2 + rest)
        integrand = np.exp(1j * np.outer(t - times, lxi)) * total
    else:
        cubic_a = omt.apply_batch(aux_all, cU_all)
        cubic_b = omt.apply_batch(cU_all, aux_all)
        rest = c_uu_all - omt_mask.apply_batch(cU_all, cU_all)
        # the second cubic term enters with the opposite sign: the conjugate
        # factor twists with phase exp(+i s <eta>)
        total = -1j * alpha * xi * (cubic_a + rest) + 1j * alpha * xi * cubic_b
        integrand = np.exp(1j * alpha * np.outer(t - times, xi)) * total

    duhamel = simpson(integrand, x=times, axis=0)

    first = traj.states[0]
    cU0 = to_spectral(first.U).coeffs
    cN0 = to_spectral(first.N).coeffs
    if which == "U":
        b0 = om.apply_coeffs(cN0, cU0) / lxi
        bt = om.apply_coeffs(cN_t, cU_t) / lxi
        rhs = np.exp(1j * t * lxi) * (cU0 + b0) - bt + duhamel
    else:
        b0 = alpha * xi * omt.apply_coeffs(cU0, cU0)
        bt = alpha * xi * omt.apply_coeffs(cU_t, cU_t)
        rhs = np.exp(1j * alpha * t * xi) * (cN0 + b0) - bt + duhamel

    num = spectral_l2(SpectralField(grid, rhs - target))
    return 0.0 if den == 0.0 else num / den


# ---------------------------------------------------------------------------
# boundedness sweeps
# ---------------------------------------------------------------------------

ESTIMATES = (
    "bd_U",      # ||<D>^{-1} Om(N,U)||_{H1} / (||N||_2 ||U||_{H1})
    "bd_N",      # ||D OmT(U,U)||_2 / ||U||_{H1}^2
    "cubic_1",   # ||<D>^{-1} Om(D|U|^2,U)||_{H1} / (||U||_6^2 ||U||_{H1})
    "cubic_2",   # split-norm of <D>^{-1} Om(N, <D>^{-1}(NU)) / (||N||_2^2 ||U||_6)
    "cubic_3",   # ||D OmT(<D>^{-1}(NU), U)||_2 / (||N||_2 ||U||_6^2)
    "bi_LH",     # ||<D>^{-1}(NU)_{LH}||_{H1} / Besov pair
    "bi_HH",     # ||<D>^{-1}(NU)_{HH}||_{H1} / Besov pair
    "bi_DHH",    # ||D(U conj U)_{HH}||_2 / split-norm(U)^2
)


@dataclass(frozen=True)
class SweepRow:
    estimate: str
    M: int
    trial: int
    value: float


@dataclass(frozen=True)
class SweepReport:
    alpha: float
    sizes: tuple[int, ...]
    trials: int
    eps: float
    rows: tuple[SweepRow, ...]

    def max_constants(self) -> dict[str, dict[int, float]]:
        out: dict[str, dict[int, float]] = {e: {} for e in ESTIMATES}
        for row in self.rows:
            cur = out[row.estimate].get(row.M, 0.0)
            out[row.estimate][row.M] = max(cur, row.value)
        return out

    def stability_ratios(self) -> dict[str, float]:
        ratios = {}
        for est, per_m in self.max_constants().items():
            vals = list(per_m.values())
            if vals:
                ratios[est] = max(vals) / min(vals)
        return ratios

    def passed(self, factor: float = 2.0) -> bool:
        return all(r <= factor for r in self.stability_ratios().values())

    def write_csv(self, path) -> None:
        lines = ["estimate,M,trial,value"]
        for r in self.rows:
            lines.append(f"{r.estimate},{r.M},{r.trial},{r.value:.17g}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _split_norm(f: PhysField, p: float, s_high: float) -> float:
    """||P_{<0} f||_p + inhomogeneous Besov of P_{>=0} f at regularity s_high."""
    c = to_spectral(f)
    low = SpectralField(c.grid, c.coeffs * chi_le(c.grid.xi, -1))
    high = SpectralField(c.grid, c.coeffs - low.coeffs)
    return lebesgue_norm(to_physical(low), p) + besov_norm(high, s_high, p, homogeneous=False)


def _xy_norm(f: PhysField, eps: float) -> float:
    """Frequency-split spatial norm: low part in hom. Besov (1/4+eps, q(eps)),
    high part in inhom. Besov (2/3, q(eps))."""
    q_eps = 1.0 / (0.25 + eps / 3.0)
    c = to_spectral(f)
    low = SpectralField(c.grid, c.coeffs * chi_le(c.grid.xi, -1))
    high = SpectralField(c.grid, c.coeffs - low.coeffs)
    return besov_norm(low, 0.25 + eps, q_eps, homogeneous=True) + besov_norm(
        high, 2.0 / 3.0, q_eps, homogeneous=False
    )


def sweep_trial_field(grid: RadialGrid, rng: np.random.Generator) -> SpectralField:
    """Two-cluster trial field: mass near xi ~ 0.1 and near xi ~ 4.

    The clusters sit k_alpha dyadic levels apart (so the non-resonant high-low
    symbols act on real mass) while products stay inside the coarsest sweep
    band, alias-free.  The construction is a formula in xi, so one generator
    state defines one continuum field on every grid size.
    """
    xi = grid.xi
    low = np.zeros(grid.M, dtype=np.complex128)
    high = np.zeros(grid.M, dtype=np.complex128)
    for _ in range(3):
        c, w = rng.uniform(0.08, 0.18), rng.uniform(0.04, 0.08)
        low += (rng.standard_normal() + 1j * rng.standard_normal()) * np.exp(-(((xi - c) / w) ** 2))
    for _ in range(3):
        c, w = rng.uniform(3.2, 4.2), rng.uniform(0.3, 0.6)
        high += (rng.standard_normal() + 1j * rng.standard_normal()) * np.exp(-(((xi - c) / w) ** 2))
    coeffs = low * eta0(xi / 0.15) + high * eta0(xi / 2.25)
    return SpectralField(grid, coeffs)


def estimate_sweep(
    alpha: float = 2.0,
    sizes: Sequence[int] = (128, 256, 512),
    trials: int = 50,
    R: float = 40.0,
    n_angular: int = 64,
    seed: int = 20240801,
    eps: float = 0.05,
) -> SweepReport:
    """Measure the normal-form estimate constants across grid refinements.

    The default alpha = 2 keeps the dyadic separation at its floor of 5, the
    largest separation a 128-mode band can host with mass on both sides; the
    sub-unit branch demands k_alpha >= 10 and would leave the high-low symbols
    acting on nothing at these sizes.
    """
    from .resonance import compute_params

    sizes = tuple(sorted(sizes))
    coarse = RadialGrid(R, sizes[0])
    params = compute_params(alpha, band=coarse)
    q_eps = 1.0 / (0.25 + eps / 3.0)
    q_meps = 1.0 / (0.25 - eps / 3.0)

    rows: list[SweepRow] = []
    for M in sizes:
        grid = RadialGrid(R, M)
        lxi = np.sqrt(1.0 + grid.xi**2)
        om = get_operator(grid, BilinearSymbol("omega", params), n_angular)
        omt = get_operator(grid, BilinearSymbol("omega_tilde", params), n_angular)

        Ns, Us = [], []
        for trial in range(trials):
            rng = np.random.default_rng(seed + trial)
            Ns.append(to_physical(sweep_trial_field(grid, rng)))
            Us.append(to_physical(sweep_trial_field(grid, rng)))
        cN = np.stack([to_spectral(f).coeffs for f in Ns])
        cU = np.stack([to_spectral(f).coeffs for f in Us])
        c_nu = np.stack(
            [to_spectral(PhysField(grid, n.values * u.values)).coeffs for n, u in zip(Ns, Us)]
        )
        c_usq = np.stack(
            [to_spectral(PhysField(grid, u.values * np.conj(u.values))).coeffs for u in Us]
        )
        aux = c_nu / lxi

        out_bd_U = om.apply_batch(cN, cU) / lxi
        out_bd_N = grid.xi * omt.apply_batch(cU, cU)
        out_c1 = om.apply_batch(grid.xi * c_usq, cU) / lxi
        out_c2 = om.apply_batch(cN, aux) / lxi
        out_c3 = grid.xi * omt.apply_batch(aux, cU)

        for trial, (N, U) in enumerate(zip(Ns, Us)):
            n_l2 = spectral_l2(SpectralField(grid, cN[trial]))
            u_h1 = sobolev_norm(U, 1.0)
            u_l6 = lebesgue_norm(U, 6.0)
            n_bes = besov_norm(N, -0.25 - eps, q_meps, homogeneous=True)
            u_bes = besov_norm(U, 0.25 + eps, q_eps, homogeneous=True)

            val = {
                "bd_U": sobolev_norm(SpectralField(grid, out_bd_U[trial]), 1.0) / (n_l2 * u_h1),
                "bd_N": spectral_l2(SpectralField(grid, out_bd_N[trial])) / u_h1**2,
                "cubic_1": sobolev_norm(SpectralField(grid, out_c1[trial]), 1.0) / (u_l6**2 * u_h1),
                "cubic_2": _split_norm(
                    to_physical(SpectralField(grid, out_c2[trial])), 1.2, 1.0 + 5.0 / 6.0
                )
                / (n_l2**2 * u_l6),
                "cubic_3": spectral_l2(SpectralField(grid, out_c3[trial])) / (n_l2 * u_l6**2),
            }
            lh = decompose_bilinear(N, U, InteractionTag.LH, params, dealiased=False)
            val["bi_LH"] = sobolev_norm(_inv_bracket(to_spectral(lh)), 1.0) / (n_bes * u_bes)
            hh = decompose_bilinear(N, U, InteractionTag.HH, params, dealiased=False)
            val["bi_HH"] = sobolev_norm(_inv_bracket(to_spectral(hh)), 1.0) / (n_bes * u_bes)
            uhh = decompose_bilinear(
                U, PhysField(grid, np.conj(U.values)), InteractionTag.HH, params, dealiased=False
            )
            val["bi_DHH"] = spectral_l2(_times_d(to_spectral(uhh))) / _xy_norm(U, eps) ** 2

            for est, v in val.items():
                rows.append(SweepRow(est, M, trial, float(v)))
        clear_bilinear_cache()

    return SweepReport(alpha, sizes, trials, eps, tuple(rows))
