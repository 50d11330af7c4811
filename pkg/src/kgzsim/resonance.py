"""Resonance phases, interaction-regime constants, and tagged bilinear splits.

A quadratic interaction between the Klein-Gordon half-wave (phase <xi>) and
the acoustic half-wave (phase alpha*|xi|) carries one of four phase
combinations

    w1 = -<xi> + alpha|xi-eta| + <eta>,     w2 = -<xi> - alpha|xi-eta| + <eta>,
    w3 = -<xi> + alpha|xi-eta| - <eta>,     w4 = -<xi> - alpha|xi-eta| - <eta>,

and the mirrored family for the acoustic output,

    wt1 = -alpha|xi| + <xi-eta> - <eta>,    wt2 = -alpha|xi| - <xi-eta> + <eta>,
    wt3 = -alpha|xi| + <xi-eta> + <eta>,    wt4 = -alpha|xi| - <xi-eta> - <eta>.

For alpha < 1 the phase w1 vanishes at |eta| = 0, |xi| = c = 2 alpha/(1-alpha^2)
(w3 and c = 2 alpha/(alpha^2-1) for alpha > 1), so high-low products are split
into a resonant dyadic annulus around c (tag AL / LA) and its complement
(tag XL / LX), with the low frequency at least k_sep dyadic levels below.
``compute_params`` produces constants (c, delta, k_sep, rho) for which the
resonant phase is verifiably bounded below, |w| >= rho * r, outside the
annulus.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .radial import (
    PhysField,
    RadialGrid,
    SpectralField,
    as_physical,
    chi_k,
    chi_le,
    dealias,
    to_physical,
    to_spectral,
)


def _bracket(x):
    """Japanese bracket <x> = sqrt(1 + x^2)."""
    return np.sqrt(1.0 + np.square(x))


def interaction_distance(xi, eta, cos_theta):
    """|xi - eta| from the two radii and the cosine of the enclosed angle."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    cos_theta = np.asarray(cos_theta, dtype=float)
    sq = xi**2 + eta**2 - 2.0 * xi * eta * cos_theta
    return np.sqrt(np.maximum(sq, 0.0))


def omega(j: int, xi, eta, cos_theta, alpha: float):
    """Resonance phase w_j of the Klein-Gordon-output interaction."""
    if j not in (1, 2, 3, 4):
        raise ValueError(f"index must be 1..4, got {j}")
    d = interaction_distance(xi, eta, cos_theta)
    s_mid = 1.0 if j in (1, 3) else -1.0
    s_eta = 1.0 if j in (1, 2) else -1.0
    return -_bracket(xi) + s_mid * alpha * d + s_eta * _bracket(eta)


def omega_tilde(j: int, xi, eta, cos_theta, alpha: float):
    """Resonance phase wt_j of the acoustic-output interaction."""
    if j not in (1, 2, 3, 4):
        raise ValueError(f"index must be 1..4, got {j}")
    d = interaction_distance(xi, eta, cos_theta)
    s_mid = 1.0 if j in (1, 3) else -1.0
    s_eta = -1.0 if j in (1, 4) else 1.0
    return -alpha * np.asarray(xi, dtype=float) + s_mid * _bracket(d) + s_eta * _bracket(eta)


#: sign s_j in the duality  w_j(xi -> eta - xi) = s_j * wt_j
DUALITY_SIGNS = {1: -1.0, 2: 1.0, 3: -1.0, 4: 1.0}


def dual_point(xi, eta, cos_theta):
    """Image of (|xi|, |eta|, cos) under the substitution xi -> eta - xi.

    Returns (|eta - xi|, |eta|, cos') where cos' is the cosine of the angle
    between eta - xi and eta.  Requires |eta - xi| > 0.
    """
    d = interaction_distance(xi, eta, cos_theta)
    if np.any(d == 0.0):
        raise ValueError("dual point undefined at xi = eta")
    cos_new = (np.asarray(eta, dtype=float) - np.asarray(xi) * np.asarray(cos_theta)) / d
    return d, np.asarray(eta, dtype=float), np.clip(cos_new, -1.0, 1.0)


# ---------------------------------------------------------------------------
# constants realizing the off-annulus lower bound
# ---------------------------------------------------------------------------

class Branch(str, enum.Enum):
    ALPHA_LT_1 = "alpha_lt_1"
    ALPHA_GT_1 = "alpha_gt_1"


@dataclass(frozen=True)
class ResonanceParams:
    """Constants (alpha, c, delta, k_sep, rho) of the interaction split.

    Outside the annulus [c - delta, c + delta] the resonant phase profile is
    bounded below by rho * r; k_alpha is the dyadic separation of high-low
    pairs (at least 5).
    """

    alpha: float
    c_alpha: float
    delta_alpha: float
    k_alpha: int
    rho: float
    branch: Branch

    def __post_init__(self):
        expected = 2.0 * self.alpha / abs(1.0 - self.alpha**2)
        if abs(self.c_alpha - expected) > 1e-12 * max(1.0, expected):
            raise ValueError("c_alpha does not match 2*alpha/|1-alpha^2|")
        if not (0.0 < self.delta_alpha < self.c_alpha):
            raise ValueError("delta_alpha must lie in (0, c_alpha)")
        if self.k_alpha < 5:
            raise ValueError("k_alpha must be at least 5")
        if not self.rho > 0:
            raise ValueError("rho must be positive")


def resonant_profile(r, alpha: float):
    """The zero-input-frequency profile of the resonant phase.

    alpha < 1: f(r) = alpha r - <r> + 1 (root at c = 2 alpha/(1-alpha^2));
    alpha > 1: g(r) = alpha r - <r> - 1 (root at c = 2 alpha/(alpha^2-1)).
    """
    r = np.asarray(r, dtype=float)
    shift = 1.0 if alpha < 1.0 else -1.0
    return alpha * r - _bracket(r) + shift


def _profile_over_r(r: NDArray, alpha: float) -> NDArray:
    """|profile(r)| / r in a cancellation-free form near r = 0 (alpha < 1)."""
    r = np.asarray(r, dtype=float)
    if alpha < 1.0:
        # f(r)/r = alpha - r/(1 + <r>)
        return np.abs(alpha - r / (1.0 + _bracket(r)))
    return np.abs(alpha * r - _bracket(r) - 1.0) / r


def _bisect(fn, lo: float, hi: float, tol: float = 1e-10) -> float:
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError("bisection bracket does not straddle a root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def compute_params(
    alpha: float,
    band: tuple[int, int] | RadialGrid | None = None,
    theta: float = 0.25,
    safety: float = 0.9,
    sweep_points: int = 20001,
) -> ResonanceParams:
    """Derive the interaction-split constants for a given speed ratio.

    alpha < 1: the annulus half-width is delta = theta * c (theta = 1/4 keeps
    c(1-theta) above the profile maximizer r0 = alpha/sqrt(1-alpha^2) for every
    alpha in (0,1)); rho is a certified dense-grid minimum of |f(r)|/r off the
    annulus, shrunk by ``safety``.

    alpha > 1: the crossings of |g(r)| with (alpha-1) r / 2 are found by
    bisection; delta is the larger distance of the crossings from c and
    rho = (alpha-1)/2.

    ``band`` (a grid or a (k_min, k_max) pair) caps the dyadic separation so
    that the band supports at least three separated high blocks; a warning is
    issued when the cap binds.
    """
    if not alpha > 0 or abs(alpha - 1.0) <= 1e-6:
        raise ValueError(f"alpha must be positive with |alpha-1| > 1e-6, got {alpha}")

    if alpha < 1.0:
        c = 2.0 * alpha / (1.0 - alpha**2)
        r0 = alpha / np.sqrt(1.0 - alpha**2)
        delta = theta * c
        if not (r0 < c * (1.0 - theta) < c):
            raise ValueError(f"theta={theta} violates c(1-theta) in (r0, c)")
        r = np.linspace(0.0, 10.0 * c, sweep_points)
        outside = (r < c - delta) | (r > c + delta)
        ratios = _profile_over_r(np.where(r == 0.0, 1e-12, r), alpha)
        ratios[r == 0.0] = alpha  # limit of f(r)/r at the origin
        rho = safety * float(ratios[outside].min())
        floors = [5.0, abs(np.log2(rho)) + 5.0, abs(np.log2(1.0 - alpha)) + 5.0]
        branch = Branch.ALPHA_LT_1
    else:
        c = 2.0 * alpha / (alpha**2 - 1.0)
        half_line = 0.5 * (alpha - 1.0)

        def gap(r):
            return abs(resonant_profile(r, alpha)) - half_line * r

        # |g| decreases to 0 at c from the left and grows linearly beyond, so
        # there is exactly one crossing on each side of c.
        r_c1 = _bisect(gap, 1e-9, c)
        hi = 2.0 * c
        while gap(hi) <= 0:
            hi *= 2.0
        r_c2 = _bisect(gap, c, hi)
        delta = max(c - r_c1, r_c2 - c)
        rho = half_line
        floors = [5.0, abs(np.log2(alpha - 1.0)) + 5.0]
        branch = Branch.ALPHA_GT_1

    k_sep = int(np.ceil(max(floors)))
    if band is not None:
        k_lo, k_hi = (band.k_min, band.k_max) if isinstance(band, RadialGrid) else band
        cap = (k_hi - k_lo) - 2
        if cap < k_sep:
            warnings.warn(
                f"dyadic separation {k_sep} exceeds the grid band "
                f"[{k_lo}, {k_hi}]; capped to {max(cap, 5)}",
                stacklevel=2,
            )
            k_sep = max(cap, 5)

    params = ResonanceParams(alpha, c, delta, k_sep, rho, branch)
    ok, margin = verify_profile_bound(params)
    if not ok:
        raise AssertionError(f"off-annulus profile bound failed (margin {margin:.3e})")
    return params


def verify_profile_bound(params: ResonanceParams, n_points: int = 10001, span: float = 10.0) -> tuple[bool, float]:
    """Dense 1D re-verification of |profile(r)| >= rho * r off the annulus.

    Returns (ok, worst margin) where margin = min(|profile|/r - rho).
    """
    c, d = params.c_alpha, params.delta_alpha
    r = np.linspace(1e-9, span * c, n_points)
    outside = (r < c - d) | (r > c + d)
    ratios = _profile_over_r(r, params.alpha)
    margin = float((ratios[outside] - params.rho).min())
    return margin >= 0.0, margin


# ---------------------------------------------------------------------------
# interaction tags
# ---------------------------------------------------------------------------

class InteractionTag(enum.Enum):
    """Bilinear frequency regime of a product f*g.

    LH: f low, g high;  HL: f high, g low;  HH: comparable.
    AL / XL refine HL by whether the high block meets the resonant annulus;
    LA / LX refine LH likewise (the high factor is then g).
    """

    LH = "LH"
    HL = "HL"
    HH = "HH"
    AL = "AL"
    XL = "XL"
    LA = "LA"
    LX = "LX"


def _block_resonant(k: int, params: ResonanceParams) -> bool:
    return abs(2.0**k - params.c_alpha) <= params.delta_alpha


def in_support(tag: InteractionTag, k1: int, k2: int, params: ResonanceParams) -> bool:
    """Whether the dyadic block pair (k1 for f, k2 for g) carries the tag."""
    ka = params.k_alpha
    if tag is InteractionTag.LH:
        return k1 <= k2 - ka
    if tag is InteractionTag.HL:
        return k2 <= k1 - ka
    if tag is InteractionTag.HH:
        return abs(k1 - k2) < ka
    if tag is InteractionTag.AL:
        return k2 <= k1 - ka and _block_resonant(k1, params)
    if tag is InteractionTag.XL:
        return k2 <= k1 - ka and not _block_resonant(k1, params)
    if tag is InteractionTag.LA:
        return k1 <= k2 - ka and _block_resonant(k2, params)
    if tag is InteractionTag.LX:
        return k1 <= k2 - ka and not _block_resonant(k2, params)
    raise ValueError(f"unknown tag {tag}")


def decompose_bilinear(
    f: PhysField,
    g: PhysField,
    tag: InteractionTag,
    params: ResonanceParams,
    dealiased: bool = True,
) -> PhysField:
    """Tagged part of the product f*g.

    High-low tags sum P_k f * P_{<= k - k_alpha} g over resolved high blocks k
    (low-high mirrored); HH sums the nearly-diagonal block pairs.  Products
    are formed in physical space; with ``dealiased`` the inputs and the result
    are truncated by the 2/3 rule.
    """
    fp, gp = as_physical(f), as_physical(g)
    grid = fp.grid
    if grid.key() != gp.grid.key():
        raise ValueError("fields live on different grids")
    cf = to_spectral(fp)
    cg = to_spectral(gp)
    if dealiased:
        cf, cg = dealias(cf), dealias(cg)
    ks = list(grid.resolved_k)
    ka = params.k_alpha

    def block(c: SpectralField, k: int) -> NDArray:
        return to_physical(SpectralField(grid, c.coeffs * chi_k(grid.xi, k))).values

    def low(c: SpectralField, k: int) -> NDArray:
        return to_physical(SpectralField(grid, c.coeffs * chi_le(grid.xi, k))).values

    acc = np.zeros(grid.M, dtype=np.complex128)
    if tag in (InteractionTag.HL, InteractionTag.AL, InteractionTag.XL):
        for k in ks:
            if tag is InteractionTag.AL and not _block_resonant(k, params):
                continue
            if tag is InteractionTag.XL and _block_resonant(k, params):
                continue
            acc += block(cf, k) * low(cg, k - ka)
    elif tag in (InteractionTag.LH, InteractionTag.LA, InteractionTag.LX):
        for k in ks:
            if tag is InteractionTag.LA and not _block_resonant(k, params):
                continue
            if tag is InteractionTag.LX and _block_resonant(k, params):
                continue
            acc += low(cf, k - ka) * block(cg, k)
    elif tag is InteractionTag.HH:
        fb = {k: block(cf, k) for k in ks}
        gb = {k: block(cg, k) for k in ks}
        for k1 in ks:
            for k2 in ks:
                if abs(k1 - k2) < ka:
                    acc += fb[k1] * gb[k2]
    else:
        raise ValueError(f"unknown tag {tag}")

    out = SpectralField(grid, to_spectral(PhysField(grid, acc)).coeffs)
    if dealiased:
        out = dealias(out)
    return to_physical(out)


# ---------------------------------------------------------------------------
# numerical verification of the phase bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LemmaGridSpec:
    """Evaluation grid: |xi| in [xi_min, xi_max] (geometric), |eta| up to
    2^{-k_alpha}|xi|, cos(theta) in [-1, 1]."""

    xi_min: float = 0.05
    xi_max: float = 64.0
    n_xi: int = 200
    n_eta: int = 50
    n_cos: int = 21


@dataclass(frozen=True)
class BoundRow:
    quantity: str
    region: str
    value: float
    arg_xi: float
    arg_eta: float
    arg_cos: float


@dataclass(frozen=True)
class LemmaReport:
    """Grid minima of the normalized phases plus resonance evidence."""

    params: ResonanceParams
    spec: LemmaGridSpec
    rows: tuple[BoundRow, ...]
    sign_change: bool
    resonant_index: int

    @property
    def passed(self) -> bool:
        mins = [r.value for r in self.rows if r.quantity.startswith("min")]
        return self.sign_change and all(v > 0.0 for v in mins)

    def row(self, quantity: str) -> BoundRow:
        for r in self.rows:
            if r.quantity == quantity:
                return r
        raise KeyError(quantity)

    def summary(self) -> dict:
        out = {
            "alpha": self.params.alpha,
            "c_alpha": self.params.c_alpha,
            "delta_alpha": self.params.delta_alpha,
            "k_alpha": self.params.k_alpha,
            "rho": self.params.rho,
            "sign_change": self.sign_change,
            "resonant_index": self.resonant_index,
            "passed": self.passed,
        }
        for r in self.rows:
            out[r.quantity] = r.value
        return out

    def write_csv(self, path) -> None:
        lines = ["alpha,quantity,region,value,arg_xi,arg_eta,arg_cos,n_xi,n_eta,n_cos"]
        for r in self.rows:
            lines.append(
                f"{self.params.alpha:.17g},{r.quantity},{r.region},{r.value:.17g},"
                f"{r.arg_xi:.17g},{r.arg_eta:.17g},{r.arg_cos:.17g},"
                f"{self.spec.n_xi},{self.spec.n_eta},{self.spec.n_cos}"
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def verify_lemma_bounds(params: ResonanceParams, spec: LemmaGridSpec = LemmaGridSpec()) -> LemmaReport:
    """Sweep the phases over high-low grids and record normalized minima.

    The XL grid excludes output radii inside the resonant annulus, where the
    branch's resonant phase changes sign (also verified here); the HL grid
    keeps the annulus.  All minima must be positive for the report to pass.
    """
    a = params.alpha
    c, d, ka = params.c_alpha, params.delta_alpha, params.k_alpha
    xi = np.geomspace(spec.xi_min, spec.xi_max, spec.n_xi)[:, None, None]
    eta = xi * np.linspace(0.0, 2.0**-ka, spec.n_eta)[None, :, None]
    cos = np.linspace(-1.0, 1.0, spec.n_cos)[None, None, :]
    xi_b, eta_b, cos_b = np.broadcast_arrays(xi, eta, cos)

    off_annulus = (xi < c - d) | (xi > c + d)
    off_annulus = np.broadcast_to(off_annulus, xi_b.shape)

    rows: list[BoundRow] = []

    def add(name: str, region: str, values: NDArray, mask: NDArray, minimum=True):
        vals = np.where(mask, values, np.inf if minimum else -np.inf)
        idx = np.unravel_index(np.argmin(vals) if minimum else np.argmax(vals), vals.shape)
        rows.append(
            BoundRow(name, region, float(vals[idx]), float(xi_b[idx]), float(eta_b[idx]), float(cos_b[idx]))
        )

    all_pts = np.ones_like(xi_b, dtype=bool)
    w1 = np.abs(omega(1, xi_b, eta_b, cos_b, a)) / xi_b
    w3 = np.abs(omega(3, xi_b, eta_b, cos_b, a)) / _bracket(xi_b)
    add("min|w1|/|xi|", "XL", w1, off_annulus)
    add("min|w3|/<xi>", "XL", w3, off_annulus)
    add("min|w2|/<xi>", "HL", np.abs(omega(2, xi_b, eta_b, cos_b, a)) / _bracket(xi_b), all_pts)
    add("min|w4|/<xi>", "HL", np.abs(omega(4, xi_b, eta_b, cos_b, a)) / _bracket(xi_b), all_pts)

    res_idx = 1 if a < 1.0 else 3
    two_sided = w1 if res_idx == 1 else w3
    add(f"max|w{res_idx}|/scale", "XL", two_sided, off_annulus, minimum=False)

    # sign change of the resonant phase across c inside the annulus, zero input
    r_line = np.linspace(c - 0.99 * d, c + 0.99 * d, 1001)
    line = omega(res_idx, r_line, 0.0, 1.0, a)
    sign_change = bool(line.min() < 0.0 < line.max())

    return LemmaReport(params, spec, tuple(rows), sign_change, res_idx)
