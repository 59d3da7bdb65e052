"""Sampling-based verification of nu(df(x)) >= C dist(x,Z)^(k-1) near Z.

The limit "as x -> 0" is operationalized on shrinking dyadic annuli: one
fixed quasi-random pattern in the shell 1/2 <= |x| <= 1 is rescaled to each
radius, so per-annulus statistics are exactly scale-equivariant and fully
determined by the seed.

Verdicts are heuristics by design: a finite sample cannot certify an
infimum. ``holds`` needs per-annulus minima bounded below by a positive
floor (no systematic decay); ``fails`` needs monotone decay by an overall
factor >= 2; anything else is ``inconclusive``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, InvalidInputError
from .germ import GermPair, ZSpec
from .linmap import nu
from .sampling import unit_shell_sample

DIST_FLOOR = 1e-9  # points closer to Z are excluded from ratio statistics


@dataclass(frozen=True)
class LojasiewiczReport:
    radii: tuple[float, ...]
    minima: tuple[float, ...]
    argmins: tuple[tuple[float, ...], ...]
    C_hat: float
    verdict: str
    seed: int
    k: int
    samples_per_annulus: int
    skipped: int = 0

    def to_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "minima": list(self.minima),
            "argmins": [list(a) for a in self.argmins],
            "C_hat": self.C_hat,
            "verdict": self.verdict,
            "seed": self.seed,
            "k": self.k,
            "samples_per_annulus": self.samples_per_annulus,
            "skipped": self.skipped,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["annulus", "radius", "min_ratio", "argmin"])
            for i, (r, m, a) in enumerate(zip(self.radii, self.minima, self.argmins)):
                w.writerow([i, repr(r), repr(m), " ".join(repr(v) for v in a)])


@dataclass(frozen=True)
class ViolationSequence:
    """Points off Z approaching 0 whose condition ratios decay to 0."""

    points: tuple[tuple[float, ...], ...]
    ratios: tuple[float, ...]
    dists: tuple[float, ...]

    def __post_init__(self):
        for d0, d1 in zip(self.dists, self.dists[1:]):
            if not d1 < 0.5 * d0:
                raise InvalidInputError("distances must at least halve")
        for r0, r1 in zip(self.ratios, self.ratios[1:]):
            if not r1 < r0:
                raise InvalidInputError("ratios must strictly decrease")
        r1 = self.ratios[0]
        for i, r in enumerate(self.ratios, start=1):
            if r > r1 / i + 1e-15:
                raise InvalidInputError("ratios must decay at least like 1/nu")

    def to_dict(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "ratios": list(self.ratios),
            "dists": list(self.dists),
        }


def _ratio_stats(f, z: ZSpec, k: int, X: np.ndarray):
    """(min ratio, argmin, min nu, skipped) over sample rows, or None."""
    best, arg, nu_min, skipped = np.inf, None, np.inf, 0
    for x in X:
        d = z.distance(x)
        if d < DIST_FLOOR:
            skipped += 1
            continue
        v = nu(f.jacobian(x))
        nu_min = min(nu_min, v)
        r = v / d ** (k - 1)
        if r < best:
            best, arg = r, x
    if arg is None:
        return None
    return best, arg, nu_min, skipped


def _check_sampling_args(radii, samples_per_annulus):
    radii = [float(r) for r in radii]
    if len(radii) < 4 or any(b >= a for a, b in zip(radii, radii[1:])) or radii[-1] <= 0:
        raise InvalidInputError("need >= 4 strictly decreasing positive radii")
    if samples_per_annulus < 256:
        raise InvalidInputError("need >= 256 samples per annulus")
    return radii


def estimate_condition(f, z: ZSpec, k: int, radii, samples_per_annulus: int,
                       seed: int) -> LojasiewiczReport:
    """Per-annulus minima of nu(df)/dist^(k-1) and a verdict."""
    radii = _check_sampling_args(radii, samples_per_annulus)
    shell = unit_shell_sample(f.n, samples_per_annulus, seed)
    minima, argmins, skipped = [], [], 0
    for r in radii:
        stats = _ratio_stats(f, z, k, r * shell)
        if stats is None:
            raise InvalidInputError(f"all samples at radius {r} fell into Z")
        m, a, _, sk = stats
        minima.append(m)
        argmins.append(tuple(float(v) for v in a))
        skipped += sk
    C_hat = float(min(minima))
    hi = max(minima)
    if C_hat > 0 and C_hat >= 0.5 * hi:
        verdict = "holds"
    elif all(b < a for a, b in zip(minima, minima[1:])) and minima[-1] <= 0.5 * minima[0]:
        verdict = "fails"
    else:
        verdict = "inconclusive"
    return LojasiewiczReport(
        radii=tuple(radii), minima=tuple(minima), argmins=tuple(argmins),
        C_hat=C_hat, verdict=verdict, seed=seed, k=k,
        samples_per_annulus=samples_per_annulus, skipped=skipped)


def fit_exponent(f, z: ZSpec, radii, samples_per_annulus: int, seed: int) -> float:
    """Least-squares slope of log(min nu) against log(radius).

    A condition with exponent k-1 is plausible iff the slope is at most
    k - 1 + 0.1.
    """
    radii = _check_sampling_args(radii, samples_per_annulus)
    shell = unit_shell_sample(f.n, samples_per_annulus, seed)
    mins = []
    for r in radii:
        stats = _ratio_stats(f, z, 2, r * shell)
        if stats is None:
            raise InvalidInputError(f"all samples at radius {r} fell into Z")
        mins.append(stats[2])
    if max(mins) < 1e-14:
        raise ConvergenceError("nu vanished on every annulus; regression degenerate")
    slope = np.polyfit(np.log(radii), np.log(mins), 1)[0]
    return float(slope)


def find_violation_sequence(f, z: ZSpec, k: int, seed: int,
                            r_start: float = 0.5, depth: int = 12,
                            samples_per_annulus: int = 512):
    """Search for a sequence witnessing failure of the condition.

    Greedy per-annulus minimizer of the ratio, polished by Nelder-Mead,
    then thinned until distances halve and ratios decay at least like
    1/nu. Returns None when the ratios stay bounded below.
    """
    shell = unit_shell_sample(f.n, samples_per_annulus, seed)

    def ratio(x):
        d = z.distance(x)
        if d < DIST_FLOOR:
            return np.inf
        return nu(f.jacobian(x)) / d ** (k - 1)

    cands = []
    for j in range(depth):
        r = r_start * 0.5 ** j
        stats = _ratio_stats(f, z, k, r * shell)
        if stats is None:
            continue
        _, arg, _, _ = stats
        d_arg = z.distance(arg)

        def objective(x, r=r, d_arg=d_arg):
            # trust region: stay in the annulus and keep dist comparable,
            # otherwise descent just chases dist -> 0 at every scale
            if not 0.45 * r <= np.linalg.norm(x) <= 1.05 * r:
                return np.inf
            if not 0.45 * d_arg <= z.distance(x) <= 2.0 * d_arg:
                return np.inf
            return ratio(x)

        res = optimize.minimize(
            objective, arg, method="Nelder-Mead",
            options={"maxiter": 400, "xatol": 1e-12, "fatol": 1e-14})
        x_best = res.x if np.isfinite(res.fun) and res.fun < ratio(arg) else arg
        cands.append((np.asarray(x_best, dtype=float), ratio(x_best), z.distance(x_best)))
    if not cands:
        return None
    if cands[-1][1] > 0.5 * cands[0][1]:
        return None  # ratios bounded below on the sampled range

    pts, rats, dists = [cands[0][0]], [cands[0][1]], [cands[0][2]]
    for x, r_val, d in cands[1:]:
        if d < 0.5 * dists[-1] and r_val < rats[-1]:
            pts.append(x)
            rats.append(r_val)
            dists.append(d)
    # thin until the 1/nu decay invariant is met
    for stride in (1, 2, 3, 4):
        sel = list(range(0, len(pts), stride))
        rr = [rats[i] for i in sel]
        if all(rr[i] <= rr[0] / (i + 1) + 1e-15 for i in range(len(rr))) and len(rr) >= 3:
            return ViolationSequence(
                points=tuple(tuple(float(v) for v in pts[i]) for i in sel),
                ratios=tuple(float(rats[i]) for i in sel),
                dists=tuple(float(dists[i]) for i in sel))
    return None


@dataclass(frozen=True)
class CorollaryReport:
    """Empirical constants for the Lipschitz-differential hypotheses."""

    C: float            # inf nu(df)/dist
    C1: float           # sup |f - f1| / nu(df)^2
    C2: float           # sup ||df - df1|| / nu(df)
    C2_per_annulus: tuple[float, ...]
    passes: bool        # C2 < 1/2
    diverges: bool      # C2 annulus suprema grow as radius shrinks
    skipped: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "C": self.C, "C1": self.C1, "C2": self.C2,
            "C2_per_annulus": list(self.C2_per_annulus),
            "passes": self.passes, "diverges": self.diverges,
            "skipped": self.skipped, "seed": self.seed,
        }


def check_corollary_hypotheses(pair: GermPair, radii, samples_per_annulus: int,
                               seed: int) -> CorollaryReport:
    """Empirical C, C1, C2 for the three Lipschitz-differential hypotheses."""
    radii = _check_sampling_args(radii, samples_per_annulus)
    shell = unit_shell_sample(pair.f.n, samples_per_annulus, seed)
    P = pair.P
    C = np.inf
    C1 = 0.0
    c2_annuli = []
    skipped = 0
    for r in radii:
        c2_here = 0.0
        for x in r * shell:
            d = pair.z.distance(x)
            if d < DIST_FLOOR:
                skipped += 1
                continue
            v = nu(pair.f.jacobian(x))
            if v < DIST_FLOOR:
                skipped += 1
                continue
            C = min(C, v / d)
            C1 = max(C1, float(np.linalg.norm(P.eval(x))) / v ** 2)
            dP = float(np.linalg.norm(P.jacobian(x).entries, ord=2))
            c2_here = max(c2_here, dP / v)
        c2_annuli.append(c2_here)
    C2 = max(c2_annuli)
    grow = [b > 1.5 * a for a, b in zip(c2_annuli, c2_annuli[1:])]
    diverges = all(grow) and len(grow) >= 2 and c2_annuli[0] > 0
    return CorollaryReport(C=float(C), C1=float(C1), C2=float(C2),
                           C2_per_annulus=tuple(float(v) for v in c2_annuli),
                           passes=bool(C2 < 0.5), diverges=diverges,
                           skipped=skipped, seed=seed)
