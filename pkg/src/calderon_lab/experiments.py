"""Reproducible experiment drivers and persistence.

All norm numbers produced here are *lower-bound estimates*: the best ratio
||T(f_1,...)||_p / prod ||f_j||_{p_j} over a seeded ensemble of random
band-limited inputs plus a few structured adversaries (translated, modulated
and indicator bumps).  Infinite-exponent slots always use fixed deterministic
unit-sup profiles.  Every fitted growth law is labelled "empirical, desk
scale" in the outputs; upper bounds are never claimed.

Records persist as CSV (one row per trial) and JSON (fit summary), both
carrying a leading ``schema_version`` field.  Identical (query, seed,
platform) reproduce estimates bit-for-bit; trials run in a thread pool capped
by the ``CALDERON_LAB_THREADS`` environment variable and are merged by trial
index, so parallelism does not perturb results.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gridcore import Domain, GridFunction, Spectrum, inverse_transform, lp_norm
from .lp_decomp import build_family, paraproduct_apply
from .profiles import ProfileSeed, make_profile
from . import dyadic, operators, symbols

__all__ = [
    "SCHEMA_VERSION",
    "NormQuery",
    "ExperimentRecord",
    "estimate_norm",
    "growth_in_d",
    "decay_study",
    "shift_growth_study",
    "convergence_study",
    "thread_cap",
    "write_record",
]

SCHEMA_VERSION = 1

# Gaussian bump with this amplitude has sup |A'| exactly 1
UNIT_LIP_AMP = 1.0 / math.sqrt(2.0 * math.pi / math.e)


def thread_cap():
    """Worker-pool size; capped by the CALDERON_LAB_THREADS env var."""
    default = min(os.cpu_count() or 1, 8)
    raw = os.environ.get("CALDERON_LAB_THREADS", "")
    if not raw:
        return default
    try:
        v = int(raw)
    except ValueError as exc:
        raise ValueError(f"CALDERON_LAB_THREADS must be an integer, got {raw!r}") from exc
    return max(1, v)


def _holder_check(exponents):
    *pjs, p = exponents
    for pj in pjs:
        if not (pj > 1):
            raise ValueError(f"input exponents must lie in (1, inf], got {pj}")
    lhs = sum(0.0 if pj == np.inf else 1.0 / pj for pj in pjs)
    rhs = 0.0 if p == np.inf else 1.0 / p
    if abs(lhs - rhs) > 1e-12:
        raise ValueError(f"Hoelder relation violated: sum 1/p_j = {lhs}, 1/p = {rhs}")


@dataclass(frozen=True)
class NormQuery:
    """Which operator, at which exponents, how many seeded trials."""

    operator: str
    exponents: tuple
    params: tuple = ()  # sorted (key, value) pairs
    trials: int = 16
    seed: int = 0
    length: float = 32.0
    n: int = 1024
    R: float = None

    def __post_init__(self):
        _holder_check(self.exponents)

    def param(self, key, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default

    def as_dict(self):
        return {
            "operator": self.operator,
            "exponents": [None if p == np.inf else p for p in self.exponents],
            "params": {k: v for k, v in self.params},
            "trials": self.trials,
            "seed": self.seed,
            "length": self.length,
            "n": self.n,
            "R": self.R,
        }


@dataclass
class ExperimentRecord:
    query: dict
    estimate: float
    trial_values: list = field(default_factory=list)
    fit: dict = None
    grid: dict = None
    wall_time: float = 0.0
    label: str = "empirical, desk scale"
    schema_version: int = SCHEMA_VERSION


def write_record(record: ExperimentRecord, csv_path=None, json_path=None):
    """Persist one record: CSV rows per trial, JSON for the fit summary."""
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["schema_version", "trial", "value"])
            for i, v in enumerate(record.trial_values):
                w.writerow([record.schema_version, i, repr(v)])
    if json_path is not None:
        payload = {
            "schema_version": record.schema_version,
            "query": record.query,
            "estimate": record.estimate,
            "fit": record.fit,
            "grid": record.grid,
            "wall_time": record.wall_time,
            "label": record.label,
        }
        with open(json_path, "w") as fh:
            json.dump(payload, fh, indent=2, default=str)


# ---------------------------------------------------------------------------
# input ensembles


def random_band_limited(domain, rng, band=16):
    """Random trigonometric polynomial with frequencies |xi| <= band."""
    coeffs = np.zeros(domain.n, dtype=complex)
    idx = np.abs(domain.freq_index) <= band
    k = int(np.sum(idx))
    coeffs[idx] = rng.normal(size=k) + 1j * rng.normal(size=k)
    return inverse_transform(Spectrum(domain, coeffs))


def structured_adversaries(domain):
    """Deterministic inputs that historically realise large ratios."""
    x = domain.x
    out = [
        GridFunction(domain, np.exp(-np.pi * x**2).astype(complex)),
        GridFunction(domain, (np.exp(-np.pi * (x - domain.length / 8) ** 2)).astype(complex)),
        GridFunction(
            domain,
            (np.exp(-np.pi * x**2) * np.exp(2j * np.pi * 8 * x / domain.length)),
        ),
        GridFunction(domain, (np.abs(x) <= 1.0).astype(complex)),
        GridFunction(domain, np.exp(2j * np.pi * 5 * x / domain.length).astype(complex)),
    ]
    return out


def _inf_slot_profile(domain, j):
    """Fixed unit-sup input for an infinite-exponent slot.

    Slowly varying on purpose (fundamental frequency, common phase): smoothing
    slots transmit these near-unchanged and their peaks align, so the measured
    constant reflects the finite slots rather than compounded damping of the
    sup-normalised ones.
    """
    x = domain.x
    return GridFunction(domain, np.cos(2.0 * np.pi * x / domain.length).astype(complex))


# ---------------------------------------------------------------------------
# operator registry for norm estimation


def _resolve(query: NormQuery):
    """Return (apply(finite_inputs) -> GridFunction, number of finite slots)."""
    dom = Domain(query.length, query.n)
    op = query.operator
    n_fin = sum(1 for p in query.exponents[:-1] if p != np.inf)
    if op == "identity":
        return dom, (lambda fs: fs[0]), 1
    if op == "hilbert":
        return dom, (lambda fs: operators.apply_hilbert(fs[0], route="spectral")), 1
    if op == "commutator":
        d = int(query.param("d", 1))
        amp = float(query.param("amplitude", UNIT_LIP_AMP))
        tag = query.param("profile", "gaussian-bump")
        A = make_profile(ProfileSeed(tag, amplitude=amp))
        if len(query.exponents) != d + 2:
            raise ValueError("commutator query needs d+2 exponents")
        return dom, (lambda fs: operators.apply_commutator_kernel(d, A, fs[0], R=query.R)), 1
    if op == "bht":
        alpha = float(query.param("alpha", 2.0))
        return dom, (lambda fs: operators.apply_bht(alpha, fs[0], fs[1], R=query.R)), 2
    if op == "paraproduct":
        d = int(query.param("d", 1))
        fam = build_family("noncompact")
        kinds = ("psi", "psi") + ("phi",) * d
        # widest dyadic range the scale guard allows on this grid (the psi
        # slots also touch scale k-1)
        k_cap = int(math.floor(math.log2(0.25 / dom.dx)))
        k_floor = 1 - int(math.floor(math.log2(dom.length / 8.0)))
        k_lo = int(query.param("k_min", k_floor))
        k_hi = int(query.param("k_max", k_cap))

        def run(fs):
            funcs = list(fs[:2]) + [
                _inf_slot_profile(dom, j) for j in range(d)
            ]
            return paraproduct_apply(fam, kinds, funcs, k_lo, k_hi)

        return dom, run, 2
    raise ValueError(f"unknown operator id {query.operator!r}")


def estimate_norm(query: NormQuery) -> ExperimentRecord:
    """Best-of-trials lower bound for the operator norm at the query exponents."""
    t0 = time.perf_counter()
    dom, run, n_fin = _resolve(query)
    finite_ps = [p for p in query.exponents[:-1] if p != np.inf][:n_fin]
    if len(finite_ps) < n_fin:
        raise ValueError("not enough finite exponents for the operator's slots")
    p_out = query.exponents[-1]
    adversaries = structured_adversaries(dom)

    def one_trial(t):
        fs = []
        for s in range(n_fin):
            if t < len(adversaries):
                f = adversaries[(t + s) % len(adversaries)]
            else:
                rng = np.random.default_rng((query.seed, t, s))
                f = random_band_limited(dom, rng)
            fs.append(f)
        out = run(fs)
        denom = 1.0
        for f, p in zip(fs, finite_ps):
            denom *= lp_norm(f, p)
        if denom == 0:
            return 0.0
        return lp_norm(out, p_out) / denom

    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        values = list(pool.map(one_trial, range(query.trials)))
    rec = ExperimentRecord(
        query=query.as_dict(),
        estimate=float(max(values)),
        trial_values=[float(v) for v in values],
        grid={"length": query.length, "n": query.n},
        wall_time=time.perf_counter() - t0,
    )
    return rec


# ---------------------------------------------------------------------------
# fits


def _fit_line(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    rss = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    floor = 1e-20 + 1e-14 * float(np.sum(ys**2))
    r2 = 1.0 if ss_tot < floor or rss < floor else 1.0 - rss / ss_tot
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2, "rss": rss}


def fit_growth_laws(ns, values):
    """Fit values against c*log(2+n)+b and against a power law c*n^gamma."""
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(values, dtype=float)
    logfit = _fit_line(np.log(2.0 + ns), ys)
    powfit = _fit_line(np.log(2.0 + ns), np.log(np.maximum(ys, 1e-300)))
    verdict = "log" if logfit["r2"] >= powfit["r2"] or powfit["slope"] <= 0.2 else "power"
    return {
        "log_fit": logfit,
        "power_fit": {**powfit, "exponent": powfit["slope"]},
        "preferred": verdict,
    }


# ---------------------------------------------------------------------------
# studies


def growth_in_d(d_max, trials=8, seed=0, n=1024, length=32.0, profile="gaussian-bump"):
    """Kernel-route norm estimates for C_d, d = 1..d_max, at sup|A'| = 1 and
    exponents (2, inf, ..., inf; 2); polynomial vs exponential fit comparison."""
    if d_max > 10:
        raise ValueError("d_max capped at 10")
    t0 = time.perf_counter()
    # amplitude that makes sup|A'| exactly 1 for this profile shape
    unit_amp = 1.0 / make_profile(ProfileSeed(profile, amplitude=1.0)).lip_norm
    estimates = []
    for d in range(1, d_max + 1):
        q = NormQuery(
            "commutator",
            exponents=(2.0,) + (np.inf,) * d + (2.0,),
            params=(("d", d), ("profile", profile), ("amplitude", unit_amp)),
            trials=trials,
            seed=seed,
            n=n,
            length=length,
        )
        estimates.append(estimate_norm(q).estimate)
    ds = np.arange(1, d_max + 1, dtype=float)
    ys = np.log(np.maximum(estimates, 1e-300))
    poly = _fit_line(np.log(ds), ys)  # log-log: polynomial law
    expo = _fit_line(ds, ys)  # semilog: exponential law
    # same parameter count, so AIC comparison reduces to residual sums
    aic_poly = len(ds) * math.log(max(poly["rss"], 1e-300) / len(ds)) + 4.0
    aic_expo = len(ds) * math.log(max(expo["rss"], 1e-300) / len(ds)) + 4.0
    verdict = (
        "consistent with polynomial growth"
        if aic_poly <= aic_expo
        else "exponential fit preferred"
    )
    ratios = [estimates[i + 1] / estimates[i] for i in range(len(estimates) - 1)]
    fit = {
        "loglog": poly,
        "semilog": expo,
        "aic_loglog": aic_poly,
        "aic_semilog": aic_expo,
        "ratios": ratios,
        "verdict": verdict,
    }
    return ExperimentRecord(
        query={"study": "growth-in-d", "d_max": d_max, "seed": seed, "n": n},
        estimate=float(estimates[-1]),
        trial_values=[float(v) for v in estimates],
        fit=fit,
        grid={"length": length, "n": n},
        wall_time=time.perf_counter() - t0,
    )


def decay_study(ns=None, n1s=None, resolution=512, oversample=16, degenerate=False):
    """Double-Fourier-coefficient decay along both axes.

    Standard windows: low-pass in the xi~ axis, band-pass in xi_1.  With
    ``degenerate=True`` the xi~ window is an annulus window containing the
    symbol's moving kink and the xi_1 window a wide low-pass; only the slope
    is reported there (no pass flag), the expected decay being roughly linear.
    """
    t0 = time.perf_counter()
    if ns is None:
        ns = [8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256]
    if n1s is None:
        n1s = [8, 12, 16, 24, 32, 48, 64, 96, 128]
    if degenerate:
        fam = build_family("compact")
        windows = (lambda xi: fam.psi_hat(np.asarray(xi) / 2.0), fam.phi_hat)
        table = symbols.build_coeff_table(
            list(ns) + [0], list(n1s) + [0], resolution, oversample, windows=windows
        )
        fit_n = symbols.fit_decay(table, "n", 0, ns)
        fit = {"n_axis": fit_n, "report_only": True}
        passed = None
    else:
        table = symbols.build_coeff_table(
            list(ns) + [0], list(n1s) + [0], resolution, oversample
        )
        fit_n = symbols.fit_decay(table, "n", 0, ns)
        fit_n1 = symbols.fit_decay(table, "n1", 0, n1s)
        passed = bool(fit_n["slope"] <= -1.9 and fit_n1["slope"] <= -3.0)
        fit = {"n_axis": fit_n, "n1_axis": fit_n1, "passed": passed}
    return ExperimentRecord(
        query={"study": "decay", "resolution": resolution, "degenerate": degenerate},
        estimate=fit["n_axis"]["slope"],
        trial_values=[float(abs(table[(n, 0)])) for n in ns],
        fit=fit,
        grid={"resolution": resolution, "oversample": oversample},
        wall_time=time.perf_counter() - t0,
    )


def _maximal_adversaries(domain):
    """Indicator-type inputs for the shifted maximal lower bound.

    A prefix indicator of m cells picks up one unit-average block per
    unwrapped scale below m, so its L^2 ratio grows like sqrt(log n) until
    the shift passes m; the widest indicators carry the growth out to the
    largest shifts the grid supports.
    """
    N = domain.n
    outs = []
    for cells in (1, 16, 256, 1024, 2048):
        if cells > N // 2:
            break
        v = np.zeros(N)
        v[:cells] = 1.0
        outs.append(GridFunction(domain, v.astype(complex)))
    return outs


def shift_growth_study(kind, shifts=None, n=None, length=32.0, trials=12, seed=0, q=2.0):
    """L^q lower-bound estimates of the shifted maximal / square operator
    versus the shift, fitted to c*log(2+n) and to a power law.

    The shifted square function is realised by per-scale exact translates,
    which are L^2 isometries, so its q = 2 curve is exactly flat -- the
    logarithmic upper bound holds there with c = 0 and the fit records that.
    The genuine log-type growth shows up in the maximal function; measuring
    it out to shift 1024 needs roughly n >= 4096 * top shift so that a
    logarithmic number of unwrapped scales remains available at the largest
    shift, hence the much larger default grid for that kind.
    """
    t0 = time.perf_counter()
    if shifts is None:
        # half-octave sampling of 1..1024
        shifts = sorted({int(round(2.0 ** (k / 2.0))) for k in range(21)})
    if any(s <= 0 for s in shifts):
        raise ValueError("shifts must be positive")
    if n is None:
        n = 1 << 22 if kind == "maximal" else 4096
    dom = Domain(length, n)
    fam = build_family("noncompact")
    k_max = int(math.floor(math.log2(0.25 / dom.dx)))
    k_min = max(-int(math.log2(length / 8.0)), k_max - 10)

    def inputs():
        base = _maximal_adversaries(dom) if kind == "maximal" else structured_adversaries(dom)
        ins = list(base)
        kind_id = {"maximal": 0, "square": 1}.get(kind, 2)
        for t in range(max(0, trials - len(ins))):
            rng = np.random.default_rng((seed, kind_id, t))
            ins.append(random_band_limited(dom, rng, band=n // 8))
        return ins[:trials]

    ins = inputs()

    def estimate_for(shift):
        best = 0.0
        for f in ins:
            denom = lp_norm(f, q)
            if denom == 0:
                continue
            if kind == "maximal":
                out = dyadic.shifted_maximal(shift, f)
            elif kind == "square":
                out = dyadic.shifted_square(shift, fam, f, k_min, k_max)
            else:
                raise ValueError(f"unknown shifted operator kind {kind!r}")
            best = max(best, lp_norm(out, q) / denom)
        return best

    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        values = list(pool.map(estimate_for, shifts))
    fit = fit_growth_laws(shifts, values)
    fit["passed"] = bool(
        fit["log_fit"]["r2"] >= 0.9 and fit["power_fit"]["exponent"] <= 0.2
    )
    return ExperimentRecord(
        query={"study": f"shift-log-{kind}", "shifts": list(shifts), "q": q, "seed": seed},
        estimate=float(values[-1]),
        trial_values=[float(v) for v in values],
        fit=fit,
        grid={"length": length, "n": n},
        wall_time=time.perf_counter() - t0,
    )


def convergence_study(tag, ns=(1024, 2048, 4096), seed=0):
    """Refinement slopes of the exact-identity residuals (log error vs log dx).

    Grids and profiles per identity come from ``operators.identity_setup``.
    Residuals that never rise above 1e-6 -- three orders below the identity
    tolerance -- are rounding/floor dominated and carry no measurable slope;
    the fit is skipped and recorded as such.
    """
    if len(ns) < 3:
        raise ValueError("need at least 3 refinements")
    t0 = time.perf_counter()
    errs, dxs = [], []
    length = None
    for N in ns:
        A, B, f, dom, R = operators.identity_setup(tag, N)
        length = dom.length
        res = operators.identity_residuals(tag, A, B, f, dom, R=R)
        errs.append(res["interior_sup"])
        dxs.append(dom.dx)
    if max(errs) < 1e-6:
        fit = {"slope": None, "skipped": "residuals below the 1e-6 measurement floor"}
    else:
        fit = _fit_line(np.log(dxs), np.log(errs))
    return ExperimentRecord(
        query={"study": "convergence", "identity": tag, "ns": list(ns)},
        estimate=float(errs[-1]),
        trial_values=[float(e) for e in errs],
        fit=fit,
        grid={"length": length},
        wall_time=time.perf_counter() - t0,
    )
