"""Measures on the t-line: densities over cells plus finite atom lists.

The non-pluripolar Monge–Ampère measure of a profile is its second
derivative with the pole masses removed: analytic profile kinds produce a
density with exact per-cell masses, piecewise-linear profiles produce
atoms at their kinks.  Reference measures (Fubini–Study volume, area
measure on an annulus, circle atoms) carry an analytic density callable
so quadrature downstream does not see sampling error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .basefun import logistic_density, sigmoid
from .errors import InputError
from .profiles import ConvexProfile

__all__ = [
    "RadialMeasure",
    "ma_measure",
    "fs_measure",
    "annulus_area_measure",
    "circle_atom",
    "kolmogorov_distance",
]


@dataclass(frozen=True)
class RadialMeasure:
    """Nonnegative measure: per-cell masses on breakpoints plus atoms.

    The CDF is taken linear inside cells; `density_fn`, when present, is
    the exact density used by quadrature.  `exact_total` records the
    rational total mass when the construction knows it.
    """

    breakpoints: np.ndarray
    cell_masses: np.ndarray
    atoms: tuple = ()
    density_fn: object = None
    exact_total: Fraction | None = None

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        cm = np.asarray(self.cell_masses, dtype=float)
        bp.setflags(write=False)
        cm.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "cell_masses", cm)
        object.__setattr__(self, "atoms", tuple((float(t), float(w)) for t, w in self.atoms))
        if bp.size and cm.size != bp.size - 1:
            raise InputError("cell_masses must have len(breakpoints) - 1 entries")
        if bp.size == 0 and cm.size:
            raise InputError("cells without breakpoints")
        if np.any(cm < -1e-15):
            raise InputError("negative cell mass")
        for t, w in self.atoms:
            if not np.isfinite(t):
                raise InputError("atom at infinity is not allowed")
            if w <= 0:
                raise InputError("atom weights must be positive")

    def total_mass(self) -> float:
        return float(np.sum(self.cell_masses)) + sum(w for _, w in self.atoms)

    def cdf(self, ts, side: str = "right") -> np.ndarray:
        """CDF at ts; side='left' excludes atoms exactly at t."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.zeros_like(ts)
        if self.breakpoints.size:
            cum = np.concatenate([[0.0], np.cumsum(self.cell_masses)])
            out += np.interp(ts, self.breakpoints, cum,
                             left=0.0, right=cum[-1])
        for t, w in self.atoms:
            if side == "right":
                out += np.where(ts >= t, w, 0.0)
            else:
                out += np.where(ts > t, w, 0.0)
        return out

    def mean(self) -> float:
        out = sum(t * w for t, w in self.atoms)
        if self.cell_masses.size:
            mids = 0.5 * (self.breakpoints[:-1] + self.breakpoints[1:])
            out += float(np.sum(mids * self.cell_masses))
        return out

    def support_points(self) -> np.ndarray:
        pts = [np.asarray([t for t, _ in self.atoms])]
        if self.breakpoints.size:
            pts.append(self.breakpoints)
        return np.unique(np.concatenate(pts)) if pts else np.empty(0)

    # -- serialization (density as mass per unit t on the grid cells) -------

    def to_dict(self) -> dict:
        widths = np.diff(self.breakpoints) if self.breakpoints.size else np.empty(0)
        dens = np.divide(self.cell_masses, widths, out=np.zeros_like(self.cell_masses),
                         where=widths > 0)
        return {
            "grid": [float(t) for t in self.breakpoints],
            "density": [float(d) for d in dens],
            "atoms": [[float(t), float(w)] for t, w in self.atoms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RadialMeasure":
        try:
            bp = np.asarray(d["grid"], dtype=float)
            dens = np.asarray(d["density"], dtype=float)
            atoms = tuple((float(t), float(w)) for t, w in d["atoms"])
        except KeyError as exc:
            raise InputError(f"measure dict missing field {exc}") from exc
        cm = dens * np.diff(bp) if bp.size else np.empty(0)
        return cls(bp, cm, atoms)


def ma_measure(p: ConvexProfile) -> RadialMeasure:
    """Non-pluripolar Monge–Ampère measure of a profile; mass s₊ − s₋.

    Analytic kinds yield the exact density c·σ' restricted to the slope
    window's contact range; PL profiles yield atoms at their kinks (tail
    seams included).  Pole masses at t = ±∞ are never charged.
    """
    c = float(p.class_mass)
    total = p.s_plus - p.s_minus
    if p.kind in ("base", "ienv"):
        if total == 0:
            return RadialMeasure(np.empty(0), np.empty(0), (), None, Fraction(0))
        from .basefun import logit

        lo, hi = float(p.s_minus), float(p.s_plus)
        t_lo = float(logit(lo / c)) if lo > 0 else float(p.grid[0])
        t_hi = float(logit(hi / c)) if hi < c else float(p.grid[-1])
        bp = np.linspace(t_lo, t_hi, 513)
        inner = p.grid[(p.grid > t_lo) & (p.grid < t_hi)]
        bp = np.union1d(bp, inner)
        masses = c * np.diff(sigmoid(bp))
        return RadialMeasure(
            bp, masses, (),
            density_fn=lambda t: c * logistic_density(t),
            exact_total=total,
        )
    chords = p.chord_slopes()
    slopes = np.concatenate([[float(p.s_minus)], chords, [float(p.s_plus)]])
    jumps = np.diff(slopes)
    atoms = []
    scale = max(1e-300, float(total))
    for t, w in zip(p.grid, jumps):
        if w > 1e-13 * scale:
            atoms.append((float(t), float(w)))
    return RadialMeasure(np.empty(0), np.empty(0), tuple(atoms),
                         exact_total=total)


def fs_measure(grid=None) -> RadialMeasure:
    """Fubini–Study probability volume pushed to the t-line (σ' density)."""
    from .profiles import default_grid

    if grid is None:
        grid = default_grid()
    grid = np.asarray(grid, dtype=float)
    masses = np.diff(sigmoid(grid))
    return RadialMeasure(grid, masses, (), density_fn=logistic_density,
                         exact_total=Fraction(1))


def annulus_area_measure(a: float = -1.0, b: float = 1.0, step: float = 1.0 / 64.0) -> RadialMeasure:
    """Normalized area measure of the annulus {a ≤ t ≤ b}: density ∝ e^t."""
    if not a < b:
        raise InputError("annulus needs a < b")
    grid = np.linspace(a, b, max(2, int(np.ceil((b - a) / step)) + 1))
    z = np.exp(b) - np.exp(a)
    masses = np.diff(np.exp(grid)) / z
    return RadialMeasure(grid, masses, (),
                         density_fn=lambda t: np.exp(t) / z,
                         exact_total=Fraction(1))


def circle_atom(t: float = 0.0) -> RadialMeasure:
    """Unit point mass on the circle log|z|² = t."""
    return RadialMeasure(np.empty(0), np.empty(0), ((float(t), 1.0),),
                         exact_total=Fraction(1))


def kolmogorov_distance(m1: RadialMeasure, m2: RadialMeasure) -> float:
    """sup |CDF₁ − CDF₂| over the line, atoms included from both sides."""
    pts = np.unique(np.concatenate([
        m1.support_points(), m2.support_points(),
        np.asarray([t for t, _ in m1.atoms] + [t for t, _ in m2.atoms]),
    ])) if (m1.support_points().size or m2.support_points().size) else np.zeros(1)
    best = 0.0
    for side in ("right", "left"):
        d = np.abs(m1.cdf(pts, side=side) - m2.cdf(pts, side=side))
        best = max(best, float(np.max(d)) if d.size else 0.0)
    return best


def measure_integral(f, m: RadialMeasure, extra_breaks=None, nodes: int = 32) -> float:
    """∫ f dμ for continuous f: exact atom sums plus cell quadrature.

    Cells with a density callable use Gauss–Legendre; cells without one
    integrate f against the PL mass profile via the cell midpoint rule
    refined by the cell masses (only exact for affine f, which is all the
    callers need when no density is available).
    """
    out = sum(w * float(np.atleast_1d(f(np.asarray([t])))[0]) for t, w in m.atoms)
    if m.cell_masses.size == 0:
        return out
    if m.density_fn is None:
        mids = 0.5 * (m.breakpoints[:-1] + m.breakpoints[1:])
        return out + float(np.sum(np.asarray(f(mids)) * m.cell_masses))
    from .quadrature import gauss_cells

    bps = m.breakpoints
    if extra_breaks is not None:
        inner = np.asarray(extra_breaks, dtype=float)
        inner = inner[(inner > bps[0]) & (inner < bps[-1])]
        bps = np.union1d(bps, inner)
    ts, ws = gauss_cells(bps, nodes)
    out += float(np.sum(np.asarray(f(ts)) * np.asarray(m.density_fn(ts)) * ws))
    return out
