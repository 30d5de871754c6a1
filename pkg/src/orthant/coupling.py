"""Synchronous coupling of two reflected paths and its order diagnostics.

Two paths driven by the identical increment stream preserve the coordinate
order of their starts; the weighted distance between them contracts each
time a tracked block of coordinates has hit the boundary.  This module
computes the coupled series, the boundary-hit cycle counters, the
face-crossing log consumed by the derivative machinery, and quantified
checkers for the monotonicity / domination / contraction properties.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import RbmSpec, r_inverse, contraction_constants
from .skorokhod import BrownianDriver, RbmPath, simulate


@dataclass
class WeightedNormParams:
    """Weight bases for the geometric norms: 0 < beta < delta < 1."""

    beta: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.beta < self.delta < 1.0:
            raise ValueError(
                f"need 0 < beta < delta < 1, got beta={self.beta}, delta={self.delta}")


def geometric_weights(d: int, beta: float) -> np.ndarray:
    """(beta^1, ..., beta^d)."""
    return beta ** np.arange(1, d + 1)


def weighted_l1(v: np.ndarray, beta: float) -> float:
    """sum_i beta^i |v_i| (1-based i)."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta={beta} outside (0, 1]")
    v = np.asarray(v, dtype=float)
    return float(np.sum(geometric_weights(v.shape[-1], beta) * np.abs(v)))


def weighted_sup(v: np.ndarray, beta: float) -> float:
    """max_i beta^i |v_i| (1-based i)."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta={beta} outside (0, 1]")
    v = np.asarray(v, dtype=float)
    return float(np.max(geometric_weights(v.shape[-1], beta) * np.abs(v)))


@dataclass
class SyncCoupledPaths:
    """Two paths on one increment stream plus their difference series."""

    spec: RbmSpec
    x: np.ndarray
    x_tilde: np.ndarray
    seed: int
    h: float
    T: float
    path_x: RbmPath
    path_xt: RbmPath
    delta_X: np.ndarray      # (n+1, d) X(x,.) - X(x~,.)
    delta_L: np.ndarray      # (n+1, d) L(x,.) - L(x~,.)
    Y: np.ndarray            # (n+1, d) R^{-1} delta_X


def couple(spec: RbmSpec, x, x_tilde, T: float, h: float, seed: int = 0,
           increments: Optional[np.ndarray] = None) -> SyncCoupledPaths:
    """Simulate X(x, .) and X(x~, .) on the same Brownian increments."""
    x = np.asarray(x, dtype=float)
    x_tilde = np.asarray(x_tilde, dtype=float)
    if increments is None:
        driver = BrownianDriver(seed=seed, m=spec.m, h=h)
        n = int(round(T / h))
        increments = driver.block(n)
    path_x = simulate(spec, x, T, h, increments=increments)
    path_xt = simulate(spec, x_tilde, T, h, increments=increments)
    delta_X = path_x.X - path_xt.X
    delta_L = path_x.L - path_xt.L
    Rinv = r_inverse(spec.P)
    Y = delta_X @ Rinv.T
    return SyncCoupledPaths(
        spec=spec, x=x, x_tilde=x_tilde, seed=seed, h=h, T=T,
        path_x=path_x, path_xt=path_xt,
        delta_X=delta_X, delta_L=delta_L, Y=Y,
    )


def u_beta_series(coupled: SyncCoupledPaths, beta: float) -> np.ndarray:
    """Weighted distance u(x, t_j) of the coupled pair started from (x, 0)."""
    if np.any(coupled.x_tilde != 0.0):
        raise ValueError("u series requires the comparison path to start at 0")
    w = geometric_weights(coupled.spec.d, beta)
    return np.abs(coupled.Y) @ w


@dataclass
class HitCounter:
    """Boundary-hit cycles of the first d' coordinates.

    Cycle k ends at eta[k-1] = max_i xi[k-1][i], where xi[k-1][i] is the
    first hit of coordinate i at least one time unit past the previous
    cycle end.  N(t) counts completed cycles by time t.
    """

    d_prime: int
    horizon: float
    xi: list                  # per completed cycle, array of d' hit times
    eta: np.ndarray           # completion times of the cycles

    def N_of_t(self, t: float) -> int:
        return int(np.searchsorted(self.eta, t, side="right"))


def _first_hit_after(times: np.ndarray, t: float) -> Optional[float]:
    idx = int(np.searchsorted(times, t, side="right"))
    return float(times[idx]) if idx < times.size else None


def hit_counter_from_times(hit_times: list, d_prime: int, horizon: float) -> HitCounter:
    """Build cycles from per-coordinate sorted hit-time arrays."""
    xi_all, eta_all = [], []
    eta_prev = 0.0
    while True:
        xi_k = []
        for i in range(d_prime):
            t_hit = _first_hit_after(hit_times[i], eta_prev + 1.0)
            if t_hit is None:
                return HitCounter(d_prime=d_prime, horizon=horizon,
                                  xi=xi_all, eta=np.array(eta_all))
            xi_k.append(t_hit)
        eta_k = max(xi_k)
        if eta_k > horizon:
            return HitCounter(d_prime=d_prime, horizon=horizon,
                              xi=xi_all, eta=np.array(eta_all))
        xi_all.append(np.array(xi_k))
        eta_all.append(eta_k)
        eta_prev = eta_k


def hit_counter(path: RbmPath, d_prime: int) -> HitCounter:
    if not 1 <= d_prime <= path.spec.d:
        raise ValueError(f"d'={d_prime} outside 1..{path.spec.d}")
    times = [path.hit_times(i) for i in range(1, d_prime + 1)]
    return hit_counter_from_times(times, d_prime, horizon=path.n_steps * path.h)


@dataclass
class CrossingLog:
    """Face-crossing sequence (i_k, tau_k), consecutive coordinates distinct.

    Simultaneous within-step hits get distinct pseudo-times inside the
    step interval, ordered so that ascending coordinate index maps to
    ascending time; the spread vanishes with the step size.
    """

    d: int
    i0: int
    events: list              # [(coord 1-based, tau), ...], tau increasing

    def coordinates(self) -> list:
        return [i for i, _ in self.events]


def crossing_log_from_flags(flags: np.ndarray, h: float, i0: int, d: int) -> CrossingLog:
    if not 1 <= i0 <= d:
        raise ValueError(f"i0={i0} outside 1..{d}")
    events = []
    last = None
    hit_steps = np.nonzero(flags.any(axis=1))[0]
    for j in hit_steps:
        coords = np.nonzero(flags[j])[0]
        r_max = coords.size
        t_step = (int(j) + 1) * h
        for s, c in enumerate(coords, start=1):
            coord = int(c) + 1
            if coord == last:
                continue
            tau = t_step - h * (r_max - s) / (r_max + 1)
            events.append((coord, tau))
            last = coord
    return CrossingLog(d=d, i0=i0, events=events)


def crossing_log(path: RbmPath, i0: int) -> CrossingLog:
    return crossing_log_from_flags(path.hit_flags, path.h, i0, path.spec.d)


@dataclass
class Violation:
    step: int
    coordinate: int           # 1-based
    check: str
    margin: float             # amount by which the inequality failed


@dataclass
class CheckReport:
    n_steps: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def worst(self) -> Optional[Violation]:
        return max(self.violations, key=lambda v: v.margin, default=None)


def _collect(report: CheckReport, bad: np.ndarray, margins: np.ndarray, check: str):
    steps, coords = np.nonzero(bad)
    for s, c in zip(steps, coords):
        report.violations.append(
            Violation(step=int(s), coordinate=int(c) + 1, check=check,
                      margin=float(margins[s, c])))


def monotonicity_check(coupled: SyncCoupledPaths, tol: float = 1e-9) -> CheckReport:
    """Pathwise order checks for ordered starts x >= x~.

    (i) delta_X >= 0; (ii) delta_L nonpositive, non-increasing and bounded
    below by -R^{-1}(x - x~); (iii) Y = R^{-1} delta_X >= 0, non-increasing.
    """
    if np.any(coupled.x < coupled.x_tilde):
        raise ValueError("monotonicity check requires x >= x_tilde entrywise")
    report = CheckReport(n_steps=coupled.path_x.n_steps)
    dX, dL, Y = coupled.delta_X, coupled.delta_L, coupled.Y

    _collect(report, dX < -tol, -dX, "delta_X_nonneg")
    _collect(report, dL > tol, dL, "delta_L_nonpos")
    incr = np.diff(dL, axis=0)
    _collect(report, incr > tol, incr, "delta_L_nonincreasing")
    Rinv = r_inverse(coupled.spec.P)
    floor = -(Rinv @ (coupled.x - coupled.x_tilde))
    gap = floor[None, :] - dL
    _collect(report, gap > tol, gap, "delta_L_floor")
    _collect(report, Y < -tol, -Y, "Y_nonneg")
    incY = np.diff(Y, axis=0)
    _collect(report, incY > tol, incY, "Y_nonincreasing")
    return report


def domination_check(spec: RbmSpec, x, k: int, T: float, h: float, seed: int = 0,
                     tol: float = 1e-9,
                     increments: Optional[np.ndarray] = None) -> CheckReport:
    """Projected system domination: X|_k <= Xbar and dL|_k >= dLbar per step.

    Xbar is the k-dimensional reflected process with parameters mu|_k,
    D|_k rows and R|_k, driven by the same Brownian motion.
    """
    if not 1 <= k <= spec.d:
        raise ValueError(f"k={k} outside 1..{spec.d}")
    x = np.asarray(x, dtype=float)
    if increments is None:
        driver = BrownianDriver(seed=seed, m=spec.m, h=h)
        increments = driver.block(int(round(T / h)))
    path_full = simulate(spec, x, T, h, increments=increments)
    sub = spec.restrict(k)
    path_bar = simulate(sub, x[:k], T, h, increments=increments)

    report = CheckReport(n_steps=path_full.n_steps)
    over = path_full.X[:, :k] - path_bar.X
    _collect(report, over > tol, over, "X_projected_dominated")
    gap = np.diff(path_bar.L, axis=0) - np.diff(path_full.L[:, :k], axis=0)
    _collect(report, gap > tol, gap, "L_increment_dominates")
    return report


@dataclass
class ContractionReport:
    conclusive: bool
    eta1: Optional[float]
    u0: float
    u_eta: Optional[float]
    drop_bound_ok: Optional[bool]      # u(eta) <= u(0) - sum beta^i x_i + tol
    lambda_applicable: Optional[bool]  # d'=d, or the size condition held
    lambda_ok: Optional[bool]
    lam: float
    C_prime: float


def contraction_check(coupled: SyncCoupledPaths, params: WeightedNormParams,
                      d_prime: int, constants: dict,
                      tol_scale: float = 1e-6) -> ContractionReport:
    """Check the weighted-distance drop over the first d'-coordinate hit cycle.

    Requires the comparison start at 0 and the geometric-decay constants
    (C, M, alpha) of the model family; lambda and C' are derived from them
    for the supplied (beta, delta).
    """
    spec = coupled.spec
    lam_tuple = contraction_constants(
        float(constants["C"]), float(constants["M"]), float(constants["alpha"]),
        params.beta, params.delta)
    _, _, c_prime, lam = lam_tuple
    counter = hit_counter(coupled.path_x, d_prime)
    u = u_beta_series(coupled, params.beta)
    u0 = float(u[0])
    tol = tol_scale * spec.d
    if counter.eta.size == 0:
        return ContractionReport(conclusive=False, eta1=None, u0=u0, u_eta=None,
                                 drop_bound_ok=None, lambda_applicable=None,
                                 lambda_ok=None, lam=lam, C_prime=c_prime)
    eta1 = float(counter.eta[0])
    idx = int(round(eta1 / coupled.h))
    u_eta = float(u[idx])
    w = geometric_weights(spec.d, params.beta)[:d_prime]
    drop = float(np.sum(w * coupled.x[:d_prime]))
    drop_ok = u_eta <= u0 - drop + tol
    if d_prime == spec.d:
        applicable = True
    else:
        threshold = c_prime * weighted_sup(coupled.x, params.delta) \
            * (params.beta / params.delta) ** (d_prime + 1)
        applicable = u0 >= threshold
    lambda_ok = (u_eta <= lam * u0 + tol) if applicable else None
    return ContractionReport(conclusive=True, eta1=eta1, u0=u0, u_eta=u_eta,
                             drop_bound_ok=drop_ok, lambda_applicable=applicable,
                             lambda_ok=lambda_ok, lam=lam, C_prime=c_prime)
