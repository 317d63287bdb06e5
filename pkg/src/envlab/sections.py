"""Filtered section spaces, weighted norms, and partial Bergman data.

Degree bookkeeping: twisting by (rank r, degree shift d) makes the level-k
section space the degree m = ⌊k·c⌋ + d monomials, filtered by the exact
integrability inequalities j + 1 > k·ν₀ and m − j + 1 > k·ν_∞ (boundary
indices diverge for exact linear tails and are excluded).

Norms follow the smooth-metric convention: the weight is m·f_FS + k·v and
the singular potential enters only through the admissible index filter.
`singular_weight=True` switches to the e^{-k·u}-weighted integrand (the
convention of the Bergman approximants' norm constraint), under which the
boundary-index integrals genuinely diverge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .basefun import ASYMPTOTE_T, as_fraction, softplus
from .errors import (
    ConditioningError,
    DivergentIntegralError,
    InputError,
    NoSectionsError,
)
from .measures import RadialMeasure, fs_measure
from .profiles import ConvexProfile, WeightedSet, _pad_to_asymptotes
from .quadrature import gauss_cells, log_integral_exp, refine_breakpoints

__all__ = [
    "TwistData",
    "SectionBasisData",
    "BergmanResult",
    "admissible_indices",
    "admissible_set",
    "h0",
    "limit_mass",
    "l2_norm",
    "sup_norm",
    "log_norm2",
    "log_sup2",
    "section_basis",
    "reference_basis",
    "bergman",
    "gram",
    "donaldson",
    "donaldson_functional",
    "bm_rate",
    "bergman_approximant",
    "approximant_lower_bound_constant",
]


@dataclass(frozen=True)
class TwistData:
    """Twist bundle reduced to (rank, degree shift)."""

    rank: int = 1
    degree_shift: int = 0

    def __post_init__(self):
        if self.rank < 1:
            raise InputError("twist rank must be at least 1")


@dataclass(frozen=True)
class SectionBasisData:
    """Admissible monomial indices plus norm data over them.

    Diagonal case: log_norms2[i] = log N²(z^{J[i]}).  General case: a
    Hermitian positive-definite Gram matrix over J.
    """

    k: int
    m: int
    J: tuple
    log_norms2: np.ndarray | None = None
    gram_matrix: np.ndarray | None = None
    norm_kind: str = "L2"

    def __post_init__(self):
        object.__setattr__(self, "J", tuple(int(j) for j in self.J))
        if self.log_norms2 is not None:
            arr = np.asarray(self.log_norms2, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, "log_norms2", arr)
            if arr.size != len(self.J):
                raise InputError("one log-norm per admissible index required")
        if self.norm_kind not in ("L2", "sup"):
            raise InputError("norm_kind must be 'L2' or 'sup'")

    @property
    def log_det_gram(self) -> float:
        """log det of the Hermitian Gram form (diagonal: Σ log N²)."""
        if self.gram_matrix is not None:
            sign, val = np.linalg.slogdet(self.gram_matrix)
            if sign <= 0:
                raise ConditioningError("Gram determinant not positive")
            return float(val)
        if self.log_norms2 is None:
            raise InputError("basis carries no norm data")
        return float(np.sum(self.log_norms2))


@dataclass(frozen=True)
class BergmanResult:
    """Partial Bergman kernel samples and the rescaled measure β = B·ν/k."""

    k: int
    grid: np.ndarray
    kernel: np.ndarray
    beta: RadialMeasure
    total_mass: float
    h0: int


# ---------------------------------------------------------------------------
# admissible indices and section counts
# ---------------------------------------------------------------------------

def admissible_indices(k: int, c, nu0, nu_inf,
                       tw: TwistData = TwistData()) -> tuple[int, list[int]]:
    """(m, J): exact rational filter of degree-m monomials by (ν₀, ν_∞)."""
    if k < 1:
        raise InputError("k must be a positive integer")
    c = as_fraction(c)
    nu0 = as_fraction(nu0)
    nu_inf = as_fraction(nu_inf)
    m = math.floor(k * c) + tw.degree_shift
    if m < 0:
        return m, []
    j_min = max(0, math.floor(k * nu0 - 1) + 1)
    j_max = min(m, math.ceil(m + 1 - k * nu_inf) - 1)
    return m, list(range(j_min, j_max + 1))


def admissible_set(k: int, u: ConvexProfile, tw: TwistData = TwistData()) -> SectionBasisData:
    m, J = admissible_indices(k, u.class_mass, u.s_minus,
                              u.class_mass - u.s_plus, tw)
    return SectionBasisData(k, m, tuple(J))


def h0(k: int, u: ConvexProfile, tw: TwistData = TwistData()) -> int:
    """Section count r·|J|; satisfies |h0/(r·k) − mass₊| ≤ 3/k."""
    return tw.rank * len(admissible_set(k, u, tw).J)


def limit_mass(c, nu0, nu_inf) -> Fraction:
    """(c − ν₀ − ν_∞)₊, the k → ∞ limit of h0/(r·k)."""
    val = as_fraction(c) - as_fraction(nu0) - as_fraction(nu_inf)
    return val if val > 0 else Fraction(0)


# ---------------------------------------------------------------------------
# weighted norms
# ---------------------------------------------------------------------------

def _exponent_fn(j: int, k: int, m: int, u: ConvexProfile, K: WeightedSet,
                 singular: bool):
    """t ↦ log of the squared pointwise weight of z^j."""
    cf = float(u.class_mass)

    def E(t):
        t = np.asarray(t, dtype=float)
        out = float(j) * t - float(m) * softplus(t) - float(k) * K.weight_at(t)
        if singular:
            out = out - float(k) * (u(t) - cf * softplus(t))
        return out

    return E


def _tail_slopes(j: int, k: int, m: int, u: ConvexProfile, singular: bool):
    """Exact asymptotic slopes of E_j at t → −∞ and t → +∞."""
    if singular:
        nu0, nu_inf = u.s_minus, u.class_mass - u.s_plus
        return Fraction(j) - k * nu0, Fraction(j - m) + k * nu_inf
    return Fraction(j), Fraction(j - m)


def _measure_is_whole_line(nu: RadialMeasure) -> bool:
    bp = nu.breakpoints
    return bool(
        bp.size
        and nu.density_fn is not None
        and bp[0] <= -ASYMPTOTE_T + 1e-9
        and bp[-1] >= ASYMPTOTE_T - 1e-9
    )


def _norm_breaks(u: ConvexProfile, K: WeightedSet, nu: RadialMeasure):
    """Quadrature breakpoints aligned with every integrand kink."""
    base = np.asarray(nu.breakpoints, dtype=float)
    if base.size == 0:
        return None
    ts, _ = K.sample_points()
    extra = np.concatenate([u.grid, ts])
    extra = extra[(extra > base[0]) & (extra < base[-1])]
    return np.union1d(base, extra)


def log_norm2(j: int, k: int, u: ConvexProfile, K: WeightedSet,
              nu: RadialMeasure, tw: TwistData = TwistData(),
              singular_weight: bool = False) -> float:
    """log N² of z^j in the weighted L² norm against ν."""
    m = math.floor(k * u.class_mass) + tw.degree_shift
    if not 0 <= j <= m:
        raise InputError(f"index {j} outside [0, {m}]")
    return _log_norm2_deg(j, k, m, u, K, nu, singular_weight)


def _log_norm2_deg(j, k, m, u, K, nu, singular) -> float:
    E = _exponent_fn(j, k, m, u, K, singular)
    breaks = _norm_breaks(u, K, nu)
    tails = {}
    if breaks is not None and _measure_is_whole_line(nu):
        s_lo, s_hi = _tail_slopes(j, k, m, u, singular)
        rate_minus = s_lo + 1    # FS density contributes e^{t} at −∞
        rate_plus = s_hi - 1     # and e^{-t} at +∞
        if rate_minus <= 0 or rate_plus >= 0:
            raise DivergentIntegralError(
                f"norm integral of index {j} diverges at k={k}"
            )
        edge_lo, edge_hi = breaks[0], breaks[-1]
        tails["tail_minus"] = (
            float(rate_minus),
            float(E(edge_lo)) + float(np.log(nu.density_fn(edge_lo))),
        )
        tails["tail_plus"] = (
            float(rate_plus),
            float(E(edge_hi)) + float(np.log(nu.density_fn(edge_hi))),
        )
    if breaks is None:
        if not nu.atoms:
            raise InputError("measure carries neither cells nor atoms")
        return log_integral_exp(E, np.asarray([0.0, 1.0]), k=k,
                                density_fn=lambda t: np.zeros_like(t),
                                atoms=nu.atoms)
    return log_integral_exp(E, breaks, k=k, density_fn=nu.density_fn,
                            atoms=nu.atoms, **tails)


def l2_norm(j: int, k: int, u: ConvexProfile, K: WeightedSet,
            nu: RadialMeasure, tw: TwistData = TwistData(),
            singular_weight: bool = False) -> float:
    return float(np.exp(0.5 * log_norm2(j, k, u, K, nu, tw, singular_weight)))


def log_sup2(j: int, k: int, u: ConvexProfile, K: WeightedSet,
             tw: TwistData = TwistData(), singular_weight: bool = False) -> float:
    """log sup over K of the squared pointwise weight of z^j.

    Compact K: scan of component grids refined against the weight scale.
    Whole space: the exponent's exact tail slopes decide boundedness; the
    padded grid reaches the asymptotic range, so the scan attains the sup.
    """
    m = math.floor(k * u.class_mass) + tw.degree_shift
    if not 0 <= j <= m:
        raise InputError(f"index {j} outside [0, {m}]")
    E = _exponent_fn(j, k, m, u, K, singular_weight)
    ts, _ = K.sample_points()
    if K.whole_space:
        s_lo, s_hi = _tail_slopes(j, k, m, u, singular_weight)
        if s_lo < 0:
            raise DivergentIntegralError(f"sup of index {j} grows at t → -inf")
        if s_hi > 0:
            raise DivergentIntegralError(f"sup of index {j} grows at t → +inf")
        bp = refine_breakpoints(_pad_to_asymptotes(ts), k,
                                extra=np.concatenate([u.grid, ts]))
        return float(np.max(E(bp)))
    segs = []
    for a, b, grid, _ in K.components:
        if a == b:
            segs.append(np.asarray([a]))
        else:
            segs.append(refine_breakpoints(grid, k, extra=u.grid))
    return float(np.max(E(np.concatenate(segs))))


def sup_norm(j: int, k: int, u: ConvexProfile, K: WeightedSet,
             tw: TwistData = TwistData(), singular_weight: bool = False) -> float:
    return float(np.exp(0.5 * log_sup2(j, k, u, K, tw, singular_weight)))


def section_basis(k: int, u: ConvexProfile, K: WeightedSet, nu: RadialMeasure,
                  tw: TwistData = TwistData(), singular_weight: bool = False,
                  norm_kind: str = "L2") -> SectionBasisData:
    """Diagonal norm data over the admissible index set."""
    basis = admissible_set(k, u, tw)
    if norm_kind == "L2":
        logs = [log_norm2(j, k, u, K, nu, tw, singular_weight) for j in basis.J]
    else:
        logs = [log_sup2(j, k, u, K, tw, singular_weight) for j in basis.J]
    return SectionBasisData(k, basis.m, basis.J, np.asarray(logs),
                            norm_kind=norm_kind)


def reference_basis(k: int, u: ConvexProfile, tw: TwistData = TwistData()) -> SectionBasisData:
    """The v = 0 Fubini–Study norms on the same filtered space."""
    return section_basis(k, u, WeightedSet.whole(), fs_measure(), tw)


# ---------------------------------------------------------------------------
# partial Bergman kernels and measures
# ---------------------------------------------------------------------------

def bergman(k: int, u: ConvexProfile, K: WeightedSet, nu: RadialMeasure,
            tw: TwistData = TwistData()) -> BergmanResult:
    """Partial Bergman kernel over (K, v, ν) and the measure β = B·ν/k.

    The measure's cell masses integrate on a finer rule than the norms,
    so the mass identity ∫β = h0/k is a genuine quadrature check.
    """
    if abs(nu.total_mass() - 1.0) > 1e-9:
        raise InputError("reference measure must be a probability measure")
    basis = section_basis(k, u, K, nu, tw)
    m = basis.m
    n_sections = tw.rank * len(basis.J)
    breaks = _norm_breaks(u, K, nu)
    if breaks is None:
        eval_grid = np.asarray(sorted(t for t, _ in nu.atoms))
    else:
        eval_grid = refine_breakpoints(breaks, k)
    if not basis.J:
        zero = RadialMeasure(np.empty(0), np.empty(0), ())
        return BergmanResult(k, eval_grid, np.zeros(eval_grid.size), zero, 0.0, 0)

    js = np.asarray(basis.J, dtype=float)
    logs = basis.log_norms2

    def kernel_at(t):
        t = np.asarray(t, dtype=float)
        base = -float(m) * softplus(t) - float(k) * K.weight_at(t)
        ex = js[None, :] * t[:, None] + base[:, None] - logs[None, :]
        return float(tw.rank) * np.sum(np.exp(ex), axis=1)

    kernel_vals = kernel_at(eval_grid)

    atoms = []
    cell_bp = np.empty(0)
    cell_masses = np.empty(0)
    for t, w in nu.atoms:
        atoms.append((t, float(kernel_at(np.asarray([t]))[0]) * w / k))
    if breaks is not None and nu.density_fn is not None:
        fine = refine_breakpoints(breaks, 4 * k)
        ts, ws = gauss_cells(fine, nodes=48)
        vals = kernel_at(ts) * np.asarray(nu.density_fn(ts)) * ws / k
        per_cell = vals.reshape(fine.size - 1, -1).sum(axis=1)
        if _measure_is_whole_line(nu):
            lo, hi = fine[0], fine[-1]
            tail_lo = tail_hi = 0.0
            for j, ln in zip(basis.J, logs):
                s_lo, s_hi = _tail_slopes(j, k, m, u, False)
                E = _exponent_fn(j, k, m, u, K, False)
                tail_lo += np.exp(float(E(lo)) + np.log(nu.density_fn(lo)) - ln) / float(s_lo + 1)
                tail_hi += np.exp(float(E(hi)) + np.log(nu.density_fn(hi)) - ln) / float(1 - s_hi)
            per_cell[0] += tw.rank * tail_lo / k
            per_cell[-1] += tw.rank * tail_hi / k
        cell_bp = fine
        cell_masses = per_cell
    beta = RadialMeasure(cell_bp, cell_masses, tuple(atoms))
    return BergmanResult(k, eval_grid, kernel_vals, beta, beta.total_mass(),
                         n_sections)


# ---------------------------------------------------------------------------
# Gram matrices for angle-dependent weights
# ---------------------------------------------------------------------------

def gram(k: int, u: ConvexProfile, K: WeightedSet, v2d, nu: RadialMeasure,
         tw: TwistData = TwistData(), n_angular: int = 64) -> SectionBasisData:
    """Hermitian Gram matrix ⟨z^i, z^j⟩ for a weight v(t, angle).

    Tensor-product quadrature: ν's cells in t times a uniform angular
    grid (reduced through the FFT of e^{-k·v(t,·)}).  Meant for moderate
    degrees; raises on a condition number above 1e12.
    """
    basis = admissible_set(k, u, tw)
    if not basis.J:
        raise NoSectionsError("no admissible indices")
    m = basis.m
    breaks = _norm_breaks(u, K, nu)
    if breaks is None:
        raise InputError("gram needs a reference measure with a density")
    M = int(n_angular)
    if M <= 2 * m:
        M = 2 * m + 2
    ts, ws = gauss_cells(refine_breakpoints(breaks, k))
    dens = np.asarray(nu.density_fn(ts))
    phis = 2.0 * np.pi * np.arange(M) / M
    W = np.exp(-float(k) * np.asarray(v2d(ts[:, None], phis[None, :])))
    fourier = np.fft.ifft(W, axis=1)  # fourier[:, Δ] = mean_φ W·e^{iΔφ}
    js = basis.J
    n = len(js)
    log_rad = -float(m) * softplus(ts)
    G = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(a, n):
            delta = js[a] - js[b]
            rad = np.exp(0.5 * (js[a] + js[b]) * ts + log_rad)
            val = np.sum(rad * fourier[:, delta % M] * dens * ws)
            G[a, b] = val
            G[b, a] = np.conj(val)
    G = 0.5 * (G + G.conj().T)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1e12:
        raise ConditioningError(f"Gram condition number {cond:.3e} exceeds 1e12")
    return SectionBasisData(k, m, js, gram_matrix=G)


# ---------------------------------------------------------------------------
# Donaldson functional and Bernstein–Markov diagnostics
# ---------------------------------------------------------------------------

def donaldson(k: int, u: ConvexProfile, A: SectionBasisData,
              B: SectionBasisData) -> float:
    """ℒ(A) − ℒ(B) = (log det G_B − log det G_A)/k² at n = 1.

    Diagonal bases contribute Σ log N² directly: the factor 2 between
    log N and log N² is absorbed here exactly once.
    """
    if A.J != B.J:
        raise InputError("bases live on different index sets")
    return (B.log_det_gram - A.log_det_gram) / float(k) ** 2


def donaldson_functional(k: int, u: ConvexProfile, A: SectionBasisData,
                         tw: TwistData = TwistData()) -> float:
    """ℒ_{k,u}(A) against the v = 0 Fubini–Study reference norms."""
    ref = reference_basis(k, u, tw)
    if ref.J != A.J:
        raise InputError("basis index set does not match the filtered space")
    return (ref.log_det_gram - A.log_det_gram) / float(k) ** 2


def bm_rate(k: int, K: WeightedSet, nu: RadialMeasure, c=Fraction(1),
            tw: TwistData = TwistData()) -> float:
    """(2/k)·log max_j (sup norm / L² norm) over the full degree range.

    Decays to 0 along k exactly when ν satisfies the Bernstein–Markov
    comparison on (K, v).
    """
    u = base_profile_cached(as_fraction(c))
    m = math.floor(k * as_fraction(c)) + tw.degree_shift
    worst = -np.inf
    for j in range(m + 1):
        ls = log_sup2(j, k, u, K, tw)
        ln = log_norm2(j, k, u, K, nu, tw)
        worst = max(worst, ls - ln)
    return worst / float(k)


_BASE_CACHE: dict = {}


def base_profile_cached(c: Fraction) -> ConvexProfile:
    if c not in _BASE_CACHE:
        from .profiles import base_profile

        _BASE_CACHE[c] = base_profile(c)
    return _BASE_CACHE[c]


# ---------------------------------------------------------------------------
# Bergman approximants
# ---------------------------------------------------------------------------

def bergman_approximant(k: int, u: ConvexProfile) -> ConvexProfile:
    """Level-k log-section-density profile approximating u's envelope.

    F̃(t) = (1/k)·log Σ_{j∈J} e^{j·t}/N_j², with norms carrying the
    singular weight e^{-k·u} against the Fubini–Study volume; the tails
    are exactly (j_min/k, j_max/k), giving the 1/k Lelong sandwich.
    """
    if u.mass <= 0:
        raise NoSectionsError("approximant needs positive mass")
    basis = section_basis(k, u, WeightedSet.whole(), fs_measure(),
                          singular_weight=True)
    if not basis.J:
        raise NoSectionsError(f"no admissible sections at k={k}")
    js = np.asarray(basis.J, dtype=float)
    logs = basis.log_norms2
    grid = _pad_to_asymptotes(u.grid)
    ex = js[None, :] * grid[:, None] - logs[None, :]
    mx = np.max(ex, axis=1)
    vals = (mx + np.log(np.sum(np.exp(ex - mx[:, None]), axis=1))) / float(k)
    s_minus = Fraction(int(basis.J[0]), k)
    s_plus = Fraction(int(basis.J[-1]), k)
    return ConvexProfile(
        u.class_mass, grid, vals, s_minus, s_plus,
        float(vals[0]) - float(s_minus) * grid[0],
        float(vals[-1]) - float(s_plus) * grid[-1],
    )


def approximant_lower_bound_constant(k: int, u: ConvexProfile,
                                     approx: ConvexProfile) -> float:
    """Smallest C with F̃ + C·log(k)/k ≥ F_u over the line."""
    from .profiles import sup_difference

    gap = sup_difference(u, approx)
    return max(0.0, float(gap) * k / np.log(max(2, k)))
