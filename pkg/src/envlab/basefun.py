"""Scalar building blocks for the radial model.

Everything on the S¹-invariant model over the sphere reduces to convex
functions of t = log|z|².  The base potential is (class mass)·softplus,
whose derivative is the logistic sigmoid and whose second derivative is
the logistic density (the Fubini–Study probability density in t).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

# Beyond this |t| the softplus asymptotes agree with the exact affine
# tails below double-precision resolution (e^-40 < 2^-53 · 40).
ASYMPTOTE_T = 40.0


def softplus(t):
    """log(1 + e^t), numerically safe for large |t|."""
    t = np.asarray(t, dtype=float)
    return np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))


def sigmoid(t):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def logistic_density(t):
    """sigma'(t) = e^t / (1+e^t)^2, the Fubini–Study density in t.

    Evaluated in exp(-|t|) form so it stays positive out to the asymptote
    range instead of underflowing through 1 - sigma.
    """
    e = np.exp(-np.abs(np.asarray(t, dtype=float)))
    return e / (1.0 + e) ** 2


def logit(x):
    return np.log(x) - np.log1p(-x)


def fs_conjugate(s, c):
    """Legendre conjugate of c·softplus at slope s in [0, c].

    Closed form s·log(s/c) + (c-s)·log((c-s)/c), with the 0·log 0 = 0
    convention at the endpoints.
    """
    s = float(s)
    c = float(c)
    if not 0.0 <= s <= c:
        raise ValueError(f"slope {s} outside [0, {c}]")
    out = 0.0
    if s > 0.0:
        out += s * np.log(s / c)
    if s < c:
        out += (c - s) * np.log((c - s) / c)
    return float(out)


def as_fraction(x) -> Fraction:
    """Coerce ints, strings 'p/q', and Fractions; floats are rejected.

    Rational data (class masses, tail slopes) stays exact end to end, so
    a float here is almost always a bug at the call site.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}: {x!r}")


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"
