"""Torus-invariant piecewise-linear potentials on the projective plane.

A potential is a finite max of affine pieces with rational gradients in
the dilated simplex Δ_c; its singularity body is the convex hull of the
gradients, the non-pluripolar mass is twice the body's area, and section
counts reduce to exact lattice-point counting inside the body's interior.
All arithmetic is rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .basefun import as_fraction, fraction_str
from .errors import InputError

__all__ = [
    "TorusProfile2",
    "RationalPolygon",
    "singularity_body",
    "np_mass2",
    "h0_toric",
    "mix_toric",
    "minkowski_mix",
]

Vec = tuple[Fraction, Fraction]


def _cross(o: Vec, a: Vec, b: Vec) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull(points: list[Vec]) -> list[Vec]:
    """Convex hull, CCW, collinear points dropped; handles 0/1/2-d hulls."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list[Vec] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Vec] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        # all points collinear
        return [pts[0], pts[-1]]
    return hull


@dataclass(frozen=True)
class RationalPolygon:
    """Convex polygon with rational vertices, counterclockwise."""

    vertices: tuple

    def __post_init__(self):
        verts = [(as_fraction(x), as_fraction(y)) for x, y in self.vertices]
        if not verts:
            raise InputError("polygon needs at least one vertex")
        object.__setattr__(self, "vertices", tuple(_hull(verts)))

    @property
    def area(self) -> Fraction:
        v = self.vertices
        if len(v) < 3:
            return Fraction(0)
        s = Fraction(0)
        for i in range(len(v)):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % len(v)]
            s += x0 * y1 - x1 * y0
        return s / 2

    @property
    def perimeter_lower(self) -> Fraction:
        """Σ max(|dx|, |dy|) over edges: a rational lower bound on the
        Euclidean perimeter (degenerate polygons included)."""
        v = self.vertices
        if len(v) < 2:
            return Fraction(0)
        total = Fraction(0)
        rng = range(len(v)) if len(v) >= 3 else range(len(v) - 1)
        for i in rng:
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % len(v)]
            total += max(abs(x1 - x0), abs(y1 - y0))
        return total

    def contains(self, pt: Vec, strict: bool = False) -> bool:
        v = self.vertices
        p = (as_fraction(pt[0]), as_fraction(pt[1]))
        if len(v) == 1:
            return (not strict) and p == v[0]
        if len(v) == 2:
            if strict:
                return False
            return (
                _cross(v[0], v[1], p) == 0
                and min(v[0][0], v[1][0]) <= p[0] <= max(v[0][0], v[1][0])
                and min(v[0][1], v[1][1]) <= p[1] <= max(v[0][1], v[1][1])
            )
        for i in range(len(v)):
            c = _cross(v[i], v[(i + 1) % len(v)], p)
            if strict and c <= 0:
                return False
            if not strict and c < 0:
                return False
        return True

    def includes(self, other: "RationalPolygon") -> bool:
        return all(self.contains(w) for w in other.vertices)

    def to_dict(self) -> dict:
        return {
            "vertices": [[fraction_str(x), fraction_str(y)] for x, y in self.vertices]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RationalPolygon":
        return cls(tuple((x, y) for x, y in d["vertices"]))


@dataclass(frozen=True)
class TorusProfile2:
    """max of affine pieces ⟨g, t⟩ + a with rational gradients in Δ_c."""

    class_mass: Fraction
    pieces: tuple

    def __post_init__(self):
        c = as_fraction(self.class_mass)
        object.__setattr__(self, "class_mass", c)
        if c <= 0:
            raise InputError("class mass must be positive")
        norm = []
        for (gx, gy), a in self.pieces:
            gx, gy, a = as_fraction(gx), as_fraction(gy), as_fraction(a)
            if gx < 0 or gy < 0 or gx + gy > c:
                raise InputError(
                    f"gradient ({gx}, {gy}) escapes the moment simplex of mass {c}"
                )
            norm.append(((gx, gy), a))
        if not norm:
            raise InputError("profile needs at least one affine piece")
        object.__setattr__(self, "pieces", tuple(norm))
        self._probe_bound()

    def _probe_bound(self):
        # F ≤ c·log(1 + e^{t1} + e^{t2}) + max(intercepts, 0): automatic for
        # intercepts ≤ 0; the probe documents the bound in general
        cap = float(max(max(a for _, a in self.pieces), 0))
        cf = float(self.class_mass)
        probe = np.linspace(-30.0, 30.0, 13)
        t1, t2 = np.meshgrid(probe, probe)
        base = cf * np.log1p(np.exp(np.minimum(t1, 700)) + np.exp(np.minimum(t2, 700)))
        vals = self.evaluate(t1, t2)
        if np.any(vals > base + cap + 1e-6):
            raise InputError("profile escapes the class bound on the probe grid")

    def evaluate(self, t1, t2):
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        out = np.full(np.broadcast(t1, t2).shape, -np.inf)
        for (gx, gy), a in self.pieces:
            out = np.maximum(out, float(gx) * t1 + float(gy) * t2 + float(a))
        return out

    def to_dict(self) -> dict:
        return {
            "class_mass": fraction_str(self.class_mass),
            "pieces": [
                {"gradient": [fraction_str(gx), fraction_str(gy)],
                 "intercept": fraction_str(a)}
                for (gx, gy), a in self.pieces
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TorusProfile2":
        pieces = tuple(
            ((p["gradient"][0], p["gradient"][1]), p["intercept"])
            for p in d["pieces"]
        )
        return cls(d["class_mass"], pieces)


def singularity_body(f: TorusProfile2) -> RationalPolygon:
    """Convex hull of the piece gradients, exact."""
    return RationalPolygon(tuple(g for g, _ in f.pieces))


def np_mass2(f: TorusProfile2) -> Fraction:
    """Non-pluripolar mass at n = 2: two factorial times the body area."""
    return 2 * singularity_body(f).area


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def h0_toric(k: int, f: TorusProfile2, tw=None) -> int:
    """r·#{α ≥ 0 : α₁+α₂ ≤ m, (α+(1,1))/k ∈ int body}, exact integers.

    Row reduction: each CCW edge gives one integer inequality in (α₁, α₂);
    rows in α₁ intersect the α₂ ranges in O(edges) integer operations.
    """
    from .sections import TwistData

    tw = tw or TwistData()
    if k < 1:
        raise InputError("k must be a positive integer")
    m = math.floor(k * f.class_mass) + tw.degree_shift
    if m < 0:
        return 0
    body = singularity_body(f)
    verts = body.vertices
    if len(verts) < 3:
        return 0
    # edge (v -> w): cross(w - v, p - v) > 0 with p = (α + 1)/k, scaled to
    # integers: P·α₁ + Q·α₂ > R
    ineqs = []
    for i in range(len(verts)):
        vx, vy = verts[i]
        wx, wy = verts[(i + 1) % len(verts)]
        ex, ey = wx - vx, wy - vy
        P = -ey
        Q = ex
        R = ex * (k * vy - 1) - ey * (k * vx - 1)
        den = math.lcm(P.denominator, Q.denominator, R.denominator)
        ineqs.append((int(P * den), int(Q * den), int(R * den)))
    count = 0
    for a1 in range(0, m + 1):
        lo, hi = 0, m - a1
        feasible = True
        for P, Q, R in ineqs:
            rhs = R - P * a1
            if Q > 0:
                lo = max(lo, rhs // Q + 1)
            elif Q < 0:
                hi = min(hi, _ceil_div(rhs, Q) - 1)
            elif rhs >= 0:
                feasible = False
                break
        if feasible and hi >= lo:
            count += hi - lo + 1
    return tw.rank * count


def h0_toric_bruteforce(k: int, f: TorusProfile2, tw=None) -> int:
    """Independent oracle: direct strict point-in-polygon over all α."""
    from .sections import TwistData

    tw = tw or TwistData()
    m = math.floor(k * f.class_mass) + tw.degree_shift
    if m < 0:
        return 0
    body = singularity_body(f)
    count = 0
    for a1 in range(0, m + 1):
        for a2 in range(0, m - a1 + 1):
            p = (Fraction(a1 + 1, k), Fraction(a2 + 1, k))
            if body.contains(p, strict=True):
                count += 1
    return tw.rank * count


def mix_toric(lam, f1: TorusProfile2, f2: TorusProfile2) -> TorusProfile2:
    """Pointwise combination λ·F₁ + (1−λ)·F₂: all pairwise pieces."""
    lam = as_fraction(lam)
    if not 0 <= lam <= 1:
        raise InputError("mixing weight must lie in [0, 1]")
    if f1.class_mass != f2.class_mass:
        raise InputError("class mass mismatch")
    pieces = []
    for (g1, a1) in f1.pieces:
        for (g2, a2) in f2.pieces:
            g = (lam * g1[0] + (1 - lam) * g2[0], lam * g1[1] + (1 - lam) * g2[1])
            pieces.append((g, lam * a1 + (1 - lam) * a2))
    return TorusProfile2(f1.class_mass, tuple(pieces))


def minkowski_mix(lam, p1: RationalPolygon, p2: RationalPolygon) -> RationalPolygon:
    """λ·P₁ + (1−λ)·P₂ as the hull of pairwise vertex combinations."""
    lam = as_fraction(lam)
    pts = []
    for x1, y1 in p1.vertices:
        for x2, y2 in p2.vertices:
            pts.append((lam * x1 + (1 - lam) * x2, lam * y1 + (1 - lam) * y2))
    return RationalPolygon(tuple(pts))
