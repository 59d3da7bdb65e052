"""Trivializing vector field and isotopy for a verified germ pair.

Given realizations f, f1 of one jet over Z with the condition verified,
the deformation F(xi, x) = f(x) + xi*P(x), P = f1 - f, is made independent
of xi by flowing along the field W that solves (d_xF) W^T = -P^T. W is
assembled by Cramer's rule over maximal minors, blended by a smooth
partition of unity supported where each minor dominates, and set to 0 on Z.
Integrating y' = W(t, y) yields the isotopy H and its inverse.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (CalibrationError, CoveringViolationError, DomainExitError,
                     InvalidInputError)
from .germ import GermPair, same_k_Z_jet
from .linmap import LinearMap, g_prime
from .sampling import ball_sample

LINSYS_TOL = 1e-9      # residual budget for (d_xF) W^T + P^T
FIELD_BOUND_SLACK = 1e-6


@dataclass(frozen=True)
class TrivializationConstants:
    C: float           # condition constant from the estimator report
    C_prime: float     # minor-level lower bound constant
    C_dprime: float    # field bound constant, 2mC sqrt(n) / (3 C')
    U_radius: float    # calibrated working-ball radius (r1)
    r0: float          # guaranteed-safe start radius, r1 * exp(-C'')

    def __post_init__(self):
        if min(self.C, self.C_prime, self.C_dprime, self.U_radius) <= 0:
            raise InvalidInputError("constants must be positive")

    def to_dict(self) -> dict:
        return {"C": self.C, "C_prime": self.C_prime, "C_dprime": self.C_dprime,
                "U_radius": self.U_radius, "r0": self.r0}


class DeformationF:
    """F(xi, x) = f(x) + xi P(x) with exact Jacobian in x."""

    def __init__(self, pair: GermPair):
        self.pair = pair
        self.f = pair.f
        self.P = pair.P
        self.n = pair.f.n
        self.m = pair.f.m
        self.k = pair.f.k

    def eval(self, xi: float, x) -> np.ndarray:
        return self.f.eval(x) + xi * self.P.eval(x)

    def d_x(self, xi: float, x) -> LinearMap:
        return LinearMap(self.f.jacobian(x).entries + xi * self.P.jacobian(x).entries)


def build_F(pair: GermPair, check_jets: bool = True, seed: int = 0) -> DeformationF:
    if check_jets:
        ok, worst = same_k_Z_jet(pair, seed=seed)
        if not ok:
            raise InvalidInputError(
                f"pair is not a common k-Z-jet (worst residual {worst:.3e})")
    return DeformationF(pair)


def calibrate_constants(pair: GermPair, report, initial_radius: float = 1.0,
                        sample_count: int = 2048, xi_count: int = 17,
                        shrink: float = 0.9, seed: int = 0) -> TrivializationConstants:
    """Shrink the working ball until |P| <= (C/3) dist^k and
    ||dP|| <= (C/3) dist^(k-1) hold on a dense sample, then bound the
    minor ratio from below to get C' and the field constant C''."""
    if report.verdict != "holds":
        raise InvalidInputError("calibration requires a 'holds' estimator verdict")
    C = report.C_hat
    F = DeformationF(pair)
    k = pair.f.k
    z = pair.z
    unit = ball_sample(pair.f.n, sample_count, seed)
    radius = initial_radius
    worst_point = None
    for _ in range(200):
        ok = True
        for x in radius * unit:
            d = z.distance(x)
            if d < 1e-12:
                continue
            if (np.linalg.norm(F.P.eval(x)) > C / 3 * d ** k or
                    np.linalg.norm(F.P.jacobian(x).entries, ord=2) > C / 3 * d ** (k - 1)):
                ok = False
                worst_point = x
                break
        if ok:
            break
        radius *= shrink
    else:
        raise CalibrationError(
            f"no radius <= {initial_radius} satisfies the P bounds; "
            f"last offender {worst_point.tolist()}")

    xis = np.linspace(-1.95, 1.95, xi_count)
    C_prime = np.inf
    for x in radius * unit:
        d = z.distance(x)
        if d < 1e-12:
            continue
        for xi in xis:
            C_prime = min(C_prime, g_prime(F.d_x(xi, x)) / d ** (k - 1))
    if not np.isfinite(C_prime) or C_prime <= 0:
        raise CalibrationError("minor ratio lower bound vanished on the sample")
    m, n = pair.f.m, pair.f.n
    C_dprime = 2 * m * C * np.sqrt(n) / (3 * C_prime)
    return TrivializationConstants(
        C=float(C), C_prime=float(C_prime), C_dprime=float(C_dprime),
        U_radius=float(radius), r0=float(radius * np.exp(-C_dprime)))


def _smoothstep(s: float) -> float:
    """C^2 ramp: 0 for s <= 1/2, 1 for s >= 1, quintic in between."""
    if s <= 0.5:
        return 0.0
    if s >= 1.0:
        return 1.0
    u = 2.0 * (s - 0.5)
    return u ** 3 * (10.0 - 15.0 * u + 6.0 * u ** 2)


class VectorFieldW:
    """Cramer-rule field blended over dominating minors; 0 on Z."""

    def __init__(self, F: DeformationF, constants: TrivializationConstants):
        self.F = F
        self.constants = constants
        self.z = F.pair.z
        self._col_sets = list(itertools.combinations(range(F.n), F.m))

    def _cramer(self, A: np.ndarray, negP: np.ndarray, cols: tuple[int, ...],
                M_I: float) -> np.ndarray:
        m, n = A.shape
        w = np.zeros(n)
        for l, col in enumerate(cols):
            acc = 0.0
            for j in range(m):
                if m == 1:
                    sub = 1.0
                else:
                    rows = [r for r in range(m) if r != j]
                    keep = [c for c in cols if c != col]
                    block = A[np.ix_(rows, keep)]
                    sub = block[0, 0] if block.shape == (1, 1) else np.linalg.det(block)
                acc += negP[j] * (-1.0) ** (l + j) * sub
            w[col] = acc / M_I
        return w

    def eval(self, xi: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = self.z.distance(x)
        if d <= 1e-14:
            return np.zeros(self.F.n)
        A = self.F.d_x(xi, x).entries
        negP = -self.F.P.eval(x)
        thresh = self.constants.C_prime * d ** (self.F.k - 1)
        weights, fields = [], []
        for cols in self._col_sets:
            sub = A[:, cols]
            M_I = sub[0, 0] if self.F.m == 1 else np.linalg.det(sub)
            if self.F.m == 1:
                hI = 1.0
            else:
                hI = 0.0
                for drop_col in cols:
                    keep = [c for c in cols if c != drop_col]
                    for j in range(self.F.m):
                        rows = [r for r in range(self.F.m) if r != j]
                        blk = A[np.ix_(rows, keep)]
                        v = blk[0, 0] if blk.shape == (1, 1) else np.linalg.det(blk)
                        hI = max(hI, abs(v))
            ratio = 0.0 if (M_I == 0.0 and hI == 0.0) else abs(M_I) / max(hI, 1e-300)
            w = _smoothstep(ratio / thresh)
            if w > 0.0:
                weights.append(w)
                fields.append(self._cramer(A, negP, cols, M_I))
        if not weights:
            raise CoveringViolationError(
                f"no active minor at xi={xi}, x={x.tolist()} (dist {d:.3e}); "
                "the minor lower bound fails here")
        total = sum(weights)
        W = sum((w / total) * f for w, f in zip(weights, fields))
        resid = np.linalg.norm(A @ W + (-negP))
        if resid > LINSYS_TOL * (1.0 + np.linalg.norm(negP)):
            raise InvalidInputError(
                f"linear system residual {resid:.3e} out of budget at x={x.tolist()}")
        bound = self.constants.C_dprime * d * (1.0 + FIELD_BOUND_SLACK)
        if np.linalg.norm(W) > bound:
            raise InvalidInputError(
                f"field bound violated at x={x.tolist()}: |W|={np.linalg.norm(W):.3e} "
                f"> C'' dist = {bound:.3e}")
        return W


def eval_W(vf: VectorFieldW, xi: float, x) -> np.ndarray:
    return vf.eval(xi, x)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)  # (T, n)
    nfev: int = 0

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]


def flow(vf: VectorFieldW, x0, t_span=(0.0, 1.0), tol: float = 1e-9,
         checkpoints: int = 17) -> Trajectory:
    """Integrate y' = W(t, y) from (t_span[0], x0) to t_span[1]."""
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    x0 = np.asarray(x0, dtype=float)
    times = np.linspace(t_span[0], t_span[1], checkpoints)
    if vf.z.distance(x0) <= 1e-14:
        return Trajectory(times=times, states=np.tile(x0, (checkpoints, 1)), nfev=0)
    r1 = vf.constants.U_radius
    max_step = min(0.5, 0.1 / vf.constants.C_dprime) if vf.constants.C_dprime > 0 else 0.5

    def rhs(t, y):
        return vf.eval(t, y)

    sol = solve_ivp(rhs, t_span, x0, method="RK45", rtol=tol, atol=tol,
                    max_step=max_step, t_eval=times, dense_output=False)
    if not sol.success:
        raise DomainExitError(f"integration failed: {sol.message}")
    states = sol.y.T
    if np.any(np.linalg.norm(states, axis=1) > r1 * (1 + 1e-9)):
        raise DomainExitError("trajectory left the calibrated ball")
    return Trajectory(times=times, states=states, nfev=sol.nfev)


@dataclass(frozen=True)
class IsotopyResult:
    grid: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)
    forward: np.ndarray = field(repr=False)      # (N, T, n): H(x, t)
    conservation: np.ndarray = field(repr=False)  # (N, T): |F(t,H) - f(x)|
    inverse_residuals: np.ndarray = field(repr=False)  # (N, T): |H~(H(x,t),t) - x|
    constants: TrivializationConstants = None
    nfev_total: int = 0

    @property
    def max_conservation(self) -> float:
        return float(np.max(self.conservation))

    @property
    def max_inverse_residual(self) -> float:
        return float(np.max(self.inverse_residuals))

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "times": self.times.tolist(),
            "forward": self.forward.tolist(),
            "max_conservation": self.max_conservation,
            "max_inverse_residual": self.max_inverse_residual,
            "constants": self.constants.to_dict() if self.constants else None,
            "nfev_total": self.nfev_total,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            n = self.grid.shape[1]
            w.writerow(["point", "t"]
                       + [f"x0_{i}" for i in range(n)]
                       + [f"H_{i}" for i in range(n)]
                       + ["conservation_residual"])
            for p in range(self.grid.shape[0]):
                for j, t in enumerate(self.times):
                    w.writerow([p, repr(float(t))]
                               + [repr(float(v)) for v in self.grid[p]]
                               + [repr(float(v)) for v in self.forward[p, j]]
                               + [repr(float(self.conservation[p, j]))])


def backward_flow(vf: VectorFieldW, y, t: float, tol: float = 1e-9) -> np.ndarray:
    """Inverse map: integrate from (t, y) back to time 0."""
    y = np.asarray(y, dtype=float)
    if vf.z.distance(y) <= 1e-14 or t == 0.0:
        return y.copy()
    traj = flow(vf, y, t_span=(t, 0.0), tol=tol, checkpoints=2)
    return traj.endpoint


def isotopy(vf: VectorFieldW, grid, tol: float = 1e-9,
            checkpoints: int = 17) -> IsotopyResult:
    """Forward flows on the grid plus inverse and conservation residuals."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    N = grid.shape[0]
    times = np.linspace(0.0, 1.0, checkpoints)
    forward = np.zeros((N, checkpoints, vf.F.n))
    conservation = np.zeros((N, checkpoints))
    inverse_res = np.zeros((N, checkpoints))
    nfev = 0
    for p in range(N):
        x0 = grid[p]
        traj = flow(vf, x0, tol=tol, checkpoints=checkpoints)
        nfev += traj.nfev
        forward[p] = traj.states
        fx = vf.F.f.eval(x0)
        for j, t in enumerate(times):
            y = traj.states[j]
            conservation[p, j] = np.linalg.norm(vf.F.eval(t, y) - fx)
            inverse_res[p, j] = np.linalg.norm(backward_flow(vf, y, t, tol=tol) - x0)
    return IsotopyResult(grid=grid, times=times, forward=forward,
                         conservation=conservation, inverse_residuals=inverse_res,
                         constants=vf.constants, nfev_total=nfev)


@dataclass(frozen=True)
class GronwallReport:
    ok: bool
    worst_margin: float
    violations: tuple

    def to_dict(self) -> dict:
        return {"ok": self.ok, "worst_margin": self.worst_margin,
                "violations": [list(v) for v in self.violations]}


def gronwall_check(result: IsotopyResult, constants: TrivializationConstants,
                   z, eps: float = 0.05) -> GronwallReport:
    """dist(H(x,t), Z) must stay in the band dist(x,Z) * exp(+-C'' t).

    Consequence of |d/dt dist| <= |W| <= C'' dist along trajectories.
    """
    c = constants.C_dprime
    violations = []
    worst = np.inf
    for p in range(result.grid.shape[0]):
        d0 = z.distance(result.grid[p])
        for j, t in enumerate(result.times):
            d = z.distance(result.forward[p, j])
            lo = d0 * np.exp(-c * t) * (1 - eps)
            hi = d0 * np.exp(c * t) * (1 + eps)
            if d0 == 0.0:
                ok_here = d == 0.0
                margin = 0.0 if ok_here else -d
            else:
                ok_here = lo <= d <= hi
                margin = min(d - lo, hi - d)
            worst = min(worst, margin)
            if not ok_here:
                violations.append((p, float(t), float(d), float(lo), float(hi)))
    return GronwallReport(ok=not violations, worst_margin=float(worst),
                          violations=tuple(violations))
