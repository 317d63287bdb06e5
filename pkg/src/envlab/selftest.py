"""Built-in invariant battery behind the `selftest` CLI subcommand.

Each check is a named callable taking a tolerance scale; scale 1 runs the
committed tolerances, scale 0 demands exactness and is expected to fail
on checks limited by float round-off (documenting achievable precision).
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .basefun import softplus
from .envelopes import (
    divergence,
    i_model_envelope,
    restricted_biconjugate,
    rooftop,
    weighted_envelope,
    window_envelope,
)
from .energy import equilibrium_energy
from .errors import EnvlabError, InputError
from .measures import fs_measure, ma_measure
from .profiles import ConvexProfile, WeightedSet, base_profile
from .sections import admissible_indices, bergman, bergman_approximant, l2_norm
from .toric import TorusProfile2, h0_toric, np_mass2, singularity_body


def _check_base(tol):
    b = base_profile(1)
    assert abs(b(0.0) - np.log(2)) <= tol * 1e-12, "base value at t=0"
    assert b.s_minus == 0 and b.s_plus == 1, "base tail slopes"
    assert abs(ma_measure(b).total_mass() - 1.0) <= max(tol * 1e-9, 0), "base mass"


def _check_envelope_closed_form(tol):
    env = window_envelope(1, Fraction(1, 3), Fraction(1, 4))
    assert abs(env(0.0) - np.log(2)) <= tol * 1e-12, "window envelope value"
    env2 = i_model_envelope(env)
    assert np.max(np.abs(env2(env.grid) - env.values)) <= tol * 1e-8, \
        "I-projection idempotency"


def _check_biconjugacy(tol):
    grid = np.linspace(-4, 4, 33)
    vals = np.maximum.reduce([0.25 * grid - 0.3, 0.5 * grid, 0.75 * grid - 0.4])
    p = ConvexProfile(1, grid, vals, Fraction(1, 4), Fraction(3, 4),
                      vals[0] - 0.25 * grid[0], vals[-1] - 0.75 * grid[-1])
    q = restricted_biconjugate(p)
    gap = np.max(np.abs(q(grid) - vals))
    assert gap <= tol * 1e-10 * max(1.0, np.max(np.abs(vals))), "biconjugacy round-trip"


def _check_weighted_point(tol):
    env = weighted_envelope(base_profile(1), WeightedSet.circles([0.0]))
    probe = np.asarray([-3.0, 0.0, 2.0])
    want = np.maximum(probe, 0.0) + np.log(2)
    assert np.max(np.abs(env(probe) - want)) <= tol * 1e-10, "point-obstacle envelope"


def _check_rooftop(tol):
    p = window_envelope(1, Fraction(1, 4), Fraction(1, 4))
    q = window_envelope(1, Fraction(1, 3), Fraction(1, 6))
    r = rooftop(p, q)
    assert r.s_minus == Fraction(1, 3) and r.s_plus == Fraction(3, 4), \
        "rooftop window intersection"
    assert divergence(p, p) == 0, "divergence on equal input"


def _check_quantization(tol):
    import math

    m, J = admissible_indices(12, 1, Fraction(1, 3), Fraction(1, 4))
    assert J == list(range(4, 10)), "admissible index filter"
    b = base_profile(1)
    got = l2_norm(5, 12, b, WeightedSet.whole(), fs_measure()) ** 2
    want = math.factorial(5) * math.factorial(7) / math.factorial(13)
    assert abs(got - want) / want <= tol * 1e-8, "Beta-function norm"
    res = bergman(12, b, WeightedSet.whole(), fs_measure())
    assert abs(res.total_mass - res.h0 / 12) <= tol * 1e-8 * res.h0 / 12, \
        "Bergman mass identity"


def _check_energy(tol):
    got = equilibrium_energy(base_profile(1), WeightedSet.circles([0.0])).value
    assert abs(got - (np.log(2) - 0.5)) <= tol * 1e-8, "equilibrium energy closed form"


def _check_toric(tol):
    simplex = TorusProfile2(1, (((0, 0), 0), ((1, 0), 0), ((0, 1), 0)))
    assert np_mass2(simplex) == 1, "toric mass"
    assert h0_toric(10, simplex) == 36, "toric lattice count"


def _check_approximant(tol):
    u = window_envelope(1, Fraction(1, 3), Fraction(1, 4))
    ap = bergman_approximant(12, u)
    assert ap.s_minus == Fraction(4, 12) and ap.s_plus == Fraction(9, 12), \
        "approximant tail indices"


CHECKS = [
    ("base-profile", _check_base),
    ("envelope-closed-form", _check_envelope_closed_form),
    ("biconjugacy", _check_biconjugacy),
    ("weighted-point-envelope", _check_weighted_point),
    ("rooftop-and-divergence", _check_rooftop),
    ("quantization", _check_quantization),
    ("energy", _check_energy),
    ("toric", _check_toric),
    ("approximant", _check_approximant),
]


def validate_profile_dict(data: dict) -> list[str]:
    """Names of the invariants a serialized profile violates (empty = valid)."""
    try:
        ConvexProfile.from_dict(data)
        return []
    except InputError as exc:
        msg = str(exc)
        if "convex" in msg:
            return ["discrete convexity"]
        if "tail" in msg:
            return ["tail consistency"]
        return [msg]
    except EnvlabError as exc:
        return [str(exc)]


def run_selftest(tol_scale: float = 1.0, profile_path: str | None = None):
    """Run the battery; returns (exit status, machine-readable failures)."""
    failures = []
    for name, fn in CHECKS:
        try:
            fn(tol_scale)
        except AssertionError as exc:
            failures.append({"check": name, "invariant": str(exc)})
        except EnvlabError as exc:
            failures.append({"check": name, "invariant": f"error: {exc}"})
    if profile_path is not None:
        with open(profile_path) as fh:
            data = json.load(fh)
        bad = validate_profile_dict(data)
        if bad:
            failures.append({"check": "profile-validation", "invariant": bad[0]})
    return (0 if not failures else 1), failures
