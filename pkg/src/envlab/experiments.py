"""Named fixtures and deterministic experiment runners.

Each runner consumes an ExperimentConfig, returns (rows, artifacts,
failures) with one ReportRow per measurement, and never clamps: a bound
violation shows up as pass=0 in its row and as an entry in failures.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .basefun import as_fraction
from .envelopes import (
    contact_leakage,
    divergence,
    i_model_envelope,
    weighted_envelope,
)
from .energy import energy_derivative_check, equilibrium_energy
from .errors import InputError
from .measures import (
    annulus_area_measure,
    circle_atom,
    fs_measure,
    kolmogorov_distance,
    ma_measure,
)
from .profiles import ConvexProfile, WeightedSet, base_profile
from .envelopes import window_envelope
from .report import ReportRow, svg_plot, write_csv
from .sections import (
    TwistData,
    approximant_lower_bound_constant,
    bergman,
    bergman_approximant,
    bm_rate,
    donaldson_functional,
    h0,
    limit_mass,
    section_basis,
)
from .toric import TorusProfile2, h0_toric, np_mass2, singularity_body


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------

def _bump(t):
    t = np.asarray(t, dtype=float)
    return 0.3 * np.exp(-np.square(t))


def radial_fixture(name: str) -> ConvexProfile:
    if name == "vtheta":
        return base_profile(1)
    if name == "third-quarter":
        return window_envelope(1, Fraction(1, 3), Fraction(1, 4))
    if name == "half-line":
        return window_envelope(1, Fraction(1, 2), Fraction(1, 2))
    if name == "sqrt2":
        return base_profile(Fraction(141421356, 10 ** 8))
    raise InputError(f"unknown radial fixture {name!r}")


def weighted_fixture(name: str):
    """(profile, K, reference measure) for Bergman-type experiments."""
    if name == "vtheta-fs":
        return base_profile(1), WeightedSet.whole(), fs_measure()
    if name == "third-quarter-fs":
        return radial_fixture("third-quarter"), WeightedSet.whole(), fs_measure()
    if name == "annulus-area":
        return base_profile(1), WeightedSet.interval(-1.0, 1.0), annulus_area_measure()
    if name == "annulus-atom":
        # Bernstein–Markov counterexample: point evaluation on a fat set
        return base_profile(1), WeightedSet.interval(-1.0, 1.0), circle_atom(0.0)
    if name == "bump-fs":
        return (
            radial_fixture("third-quarter"),
            WeightedSet.whole(v=_bump),
            fs_measure(),
        )
    raise InputError(f"unknown weighted fixture {name!r}")


def toric_fixture(name: str) -> TorusProfile2:
    h = Fraction(1, 2)
    if name == "simplex":
        return TorusProfile2(1, (((0, 0), 0), ((1, 0), 0), ((0, 1), 0)))
    if name == "half-square":
        return TorusProfile2(1, (((0, 0), 0), ((h, 0), 0), ((0, h), 0), ((h, h), 0)))
    if name == "point":
        return TorusProfile2(1, (((Fraction(1, 3), Fraction(1, 3)), 0),))
    raise InputError(f"unknown toric fixture {name!r}")


VOLUME_RADIAL_PARAMS = {
    "third-quarter": (Fraction(1), Fraction(1, 3), Fraction(1, 4)),
    "vtheta": (Fraction(1), Fraction(0), Fraction(0)),
    "sqrt2": (Fraction(141421356, 10 ** 8), Fraction(0), Fraction(0)),
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    experiment: str
    fixture: str
    k: list[int] = field(default_factory=list)
    out: str = "out"
    tolerances: dict = field(default_factory=dict)
    sweep_max: int = 0
    ranks: list[int] = field(default_factory=lambda: [1])
    shifts: list[int] = field(default_factory=lambda: [0])
    provenance: str = ""

    def __post_init__(self):
        known = {"volume", "bergman", "energy", "approx", "envelope", "selftest"}
        if self.experiment not in known:
            raise InputError(f"unknown experiment {self.experiment!r}")
        ks = [int(k) for k in self.k]
        if any(k < 1 for k in ks):
            raise InputError("k-schedule entries must be positive")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise InputError("k-schedule must be strictly increasing")
        self.k = ks

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        fields = {
            key: data[key]
            for key in ("experiment", "fixture", "k", "out", "tolerances",
                        "sweep_max", "ranks", "shifts", "provenance")
            if key in data
        }
        return cls(**fields)


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def run_volume(cfg: ExperimentConfig):
    rows, failures = [], []
    series = []
    if cfg.fixture in VOLUME_RADIAL_PARAMS:
        c, nu0, nu_inf = VOLUME_RADIAL_PARAMS[cfg.fixture]
        u = window_envelope(c, nu0, nu_inf) if (nu0, nu_inf) != (0, 0) else base_profile(c)
        limit = limit_mass(c, nu0, nu_inf)
        bound_num = 3
        for r in cfg.ranks:
            for d in cfg.shifts:
                tw = TwistData(r, d)
                errs = []
                for k in cfg.k:
                    count = h0(k, u, tw)
                    val = Fraction(count, r * k)
                    err = abs(val - limit)
                    ok = err <= Fraction(bound_num, k)
                    rows.append(ReportRow(
                        f"volume[{cfg.fixture},r={r},d={d}]", k, float(val),
                        float(limit), float(err), bool(ok)))
                    errs.append(max(float(err), 1e-18))
                    if not ok:
                        failures.append(f"volume bound broken at k={k}, r={r}, d={d}")
                series.append((f"r={r},d={d}", cfg.k, errs))
        if cfg.sweep_max:
            for r in cfg.ranks:
                for d in cfg.shifts:
                    tw = TwistData(r, d)
                    for k in range(1, cfg.sweep_max + 1):
                        err = abs(Fraction(h0(k, u, tw), r * k) - limit)
                        if err > Fraction(bound_num, k):
                            failures.append(
                                f"volume sweep: bound broken at k={k}, r={r}, d={d}")
    else:
        f = toric_fixture(cfg.fixture)
        body = singularity_body(f)
        area = body.area
        perim = body.perimeter_lower
        for r in cfg.ranks:
            tw = TwistData(r, 0)
            errs = []
            for k in cfg.k:
                count = h0_toric(k, f, tw)
                val = Fraction(count, r * k * k)
                err = abs(val - area)
                ok = err <= Fraction(4, 1) * perim / k if perim > 0 else err == 0
                rows.append(ReportRow(
                    f"volume[toric:{cfg.fixture},r={r}]", k, float(val),
                    float(area), float(err), bool(ok)))
                errs.append(max(float(err), 1e-18))
                if not ok:
                    failures.append(f"toric bound broken at k={k}, r={r}")
            series.append((f"toric r={r}", cfg.k, errs))
        if cfg.sweep_max:
            for k in range(1, cfg.sweep_max + 1):
                err = abs(Fraction(h0_toric(k, f), k * k) - area)
                if perim > 0 and err > Fraction(4, 1) * perim / k:
                    failures.append(f"toric sweep: bound broken at k={k}")
    artifacts = {"volume_convergence.svg": lambda path: svg_plot(
        path, series, title=f"volume convergence: {cfg.fixture}",
        xlabel="k", ylabel="abs err", logy=True)}
    return rows, artifacts, failures


def run_bergman(cfg: ExperimentConfig):
    u, K, nu = weighted_fixture(cfg.fixture)
    env = weighted_envelope(u, K)
    target = ma_measure(env)
    slack = float(cfg.tolerances.get("trend_slack", 1.1))
    threshold = float(cfg.tolerances.get("final_threshold", np.inf))
    leak_tol = float(cfg.tolerances.get("leak_tol", 1e-6))
    rows, failures = [], []
    dists = []
    cdf_series = []
    for k in cfg.k:
        res = bergman(k, u, K, nu)
        dist = kolmogorov_distance(res.beta, target)
        dists.append(dist)
        mass_err = abs(res.total_mass - res.h0 / k) / max(res.h0 / k, 1e-300)
        ok_mass = mass_err <= 1e-8
        rows.append(ReportRow(
            f"bergman[{cfg.fixture}:mass]", k, res.total_mass, res.h0 / k,
            mass_err, bool(ok_mass)))
        if not ok_mass:
            failures.append(f"mass identity broken at k={k}")
        rows.append(ReportRow(
            f"bergman[{cfg.fixture}:kolmogorov]", k, dist, 0.0, dist, True))
        pts = np.linspace(-6, 6, 601)
        cdf_series = [
            ("beta^k", pts, res.beta.cdf(pts)),
            ("equilibrium", pts, target.cdf(pts)),
        ]
    for a, b in zip(dists, dists[1:]):
        if b > slack * a:
            failures.append(f"kolmogorov trend violated: {a:.4g} -> {b:.4g}")
    if dists and dists[-1] > threshold:
        failures.append(
            f"final kolmogorov {dists[-1]:.4g} above threshold {threshold:.4g}")
    rows.append(ReportRow(
        f"bergman[{cfg.fixture}:final-dist]", cfg.k[-1], dists[-1], threshold,
        dists[-1], bool(dists[-1] <= threshold)))
    leak, total = contact_leakage(env, K)
    ok_leak = leak <= leak_tol * max(total, 1e-300)
    rows.append(ReportRow(
        f"bergman[{cfg.fixture}:leak]", cfg.k[-1], leak, 0.0, leak, bool(ok_leak)))
    if not ok_leak:
        failures.append(f"contact-set leakage {leak:.3g} above {leak_tol:.1g}")
    artifacts = {
        "bergman_cdf.svg": lambda path: svg_plot(
            path, cdf_series, title=f"CDF overlay at k={cfg.k[-1]}: {cfg.fixture}",
            xlabel="t", ylabel="CDF"),
        "bergman_distance.svg": lambda path: svg_plot(
            path, [("kolmogorov", cfg.k, dists)],
            title=f"weak convergence: {cfg.fixture}", xlabel="k",
            ylabel="distance", logy=True),
    }
    return rows, artifacts, failures


def run_energy(cfg: ExperimentConfig):
    u, K, nu = weighted_fixture(cfg.fixture)
    rows, failures = [], []
    target = equilibrium_energy(u, K).value
    gaps = []
    for k in cfg.k:
        basis = section_basis(k, u, K, nu)
        val = donaldson_functional(k, u, basis)
        gap = abs(val - target)
        gaps.append(gap)
        rows.append(ReportRow(
            f"energy[{cfg.fixture}:donaldson]", k, val, target, gap, True))
    for a, b in zip(gaps, gaps[1:]):
        if b > a * float(cfg.tolerances.get("gap_slack", 1.0)) + 1e-12:
            failures.append(f"donaldson gap not decreasing: {a:.4g} -> {b:.4g}")
    fd_tol = float(cfg.tolerances.get("fd_rel", 1e-3))
    fd, exact = energy_derivative_check(u, K, _bump, t=0.0, delta=1e-3)
    err = abs(fd - exact) / (1.0 + abs(exact))
    ok = err <= fd_tol
    rows.append(ReportRow(
        f"energy[{cfg.fixture}:derivative]", cfg.k[-1], fd, exact, err, bool(ok)))
    if not ok:
        failures.append(f"derivative mismatch: fd={fd:.8g} exact={exact:.8g}")
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))
    fd1, exact1 = energy_derivative_check(u, K, one, t=0.0, delta=1e-3)
    err1 = abs(fd1 - float(u.mass))
    ok1 = err1 <= 1e-6
    rows.append(ReportRow(
        f"energy[{cfg.fixture}:constant-direction]", cfg.k[-1], fd1,
        float(u.mass), err1, bool(ok1)))
    if not ok1:
        failures.append("constant-direction derivative does not match the mass")
    artifacts = {"energy_gap.svg": lambda path: svg_plot(
        path, [("|L_k - I|", cfg.k, [max(g, 1e-18) for g in gaps])],
        title=f"Donaldson gap: {cfg.fixture}", xlabel="k", ylabel="gap",
        logy=True)}
    return rows, artifacts, failures


def run_approx(cfg: ExperimentConfig):
    u = radial_fixture(cfg.fixture)
    env = i_model_envelope(u)
    rows, failures = [], []
    divs = []
    for k in cfg.k:
        ap = bergman_approximant(k, u)
        nu0_gap = abs(ap.s_minus - u.s_minus)
        nu_inf_gap = abs((ap.class_mass - ap.s_plus) - (u.class_mass - u.s_plus))
        ok_lelong = nu0_gap <= Fraction(1, k) and nu_inf_gap <= Fraction(1, k)
        mass_gap = ap.mass - env.mass
        ok_mass = 0 <= mass_gap <= Fraction(2, k)
        div = divergence(ap, env)
        divs.append(float(div))
        const = approximant_lower_bound_constant(k, u, ap)
        rows.append(ReportRow(
            f"approx[{cfg.fixture}:mass]", k, float(ap.mass), float(env.mass),
            float(abs(mass_gap)), bool(ok_mass)))
        rows.append(ReportRow(
            f"approx[{cfg.fixture}:lelong-gap]", k,
            float(max(nu0_gap, nu_inf_gap)), 0.0,
            float(max(nu0_gap, nu_inf_gap)), bool(ok_lelong)))
        rows.append(ReportRow(
            f"approx[{cfg.fixture}:divergence]", k, float(div), 0.0,
            float(div), True))
        rows.append(ReportRow(
            f"approx[{cfg.fixture}:lower-bound-C]", k, const, 0.0, 0.0, True))
        if not ok_lelong:
            failures.append(f"Lelong sandwich broken at k={k}")
        if not ok_mass:
            failures.append(f"mass bound broken at k={k}")
    for a, b in zip(divs, divs[1:]):
        if b > a + 1e-15:
            failures.append(f"divergence not monotone: {a:.4g} -> {b:.4g}")
    if cfg.sweep_max:
        for k in range(1, cfg.sweep_max + 1):
            try:
                ap = bergman_approximant(k, u)
            except Exception:
                continue
            if abs(ap.s_minus - u.s_minus) > Fraction(1, k):
                failures.append(f"sweep: Lelong bound broken at k={k}")
    artifacts = {"approx_divergence.svg": lambda path: svg_plot(
        path, [("divergence", cfg.k, [max(d, 1e-18) for d in divs])],
        title=f"approximant divergence: {cfg.fixture}", xlabel="k",
        ylabel="divergence", logy=True)}
    return rows, artifacts, failures


def run_envelope(cfg: ExperimentConfig):
    u = radial_fixture(cfg.fixture)
    env = i_model_envelope(u)
    mu = ma_measure(env)
    rows = [ReportRow(
        f"envelope[{cfg.fixture}:mass]", 0, mu.total_mass(), float(env.mass),
        abs(mu.total_mass() - float(env.mass)), True)]
    ts = np.linspace(-8, 8, 481)
    artifacts = {
        "envelope.svg": lambda path: svg_plot(
            path, [
                ("base c*f_FS", ts, float(env.class_mass) * np.log1p(np.exp(ts))),
                ("envelope", ts, env(ts)),
            ], title=f"I-model envelope: {cfg.fixture}", xlabel="t",
            ylabel="full potential"),
        "envelope.json": lambda path: _write_json(path, env.to_dict()),
    }
    return rows, artifacts, []


def _write_json(path, payload):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


RUNNERS = {
    "volume": run_volume,
    "bergman": run_bergman,
    "energy": run_energy,
    "approx": run_approx,
    "envelope": run_envelope,
}


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None):
    """Execute a config; write CSV + SVG artifacts; return failures."""
    runner = RUNNERS[cfg.experiment]
    rows, artifacts, failures = runner(cfg)
    out = out_dir or cfg.out
    write_csv(os.path.join(out, f"{cfg.experiment}_{cfg.fixture}.csv"), rows)
    for name, writer in artifacts.items():
        writer(os.path.join(out, f"{cfg.experiment}_{cfg.fixture}_{name}"))
    return rows, failures
