"""Discrete-time strong solutions: Euler increments plus exact reflection.

Each step advances the free dynamics by mu*h + D*dB and then projects back
into the orthant by solving the per-step linear complementarity problem
x_new = candidate + (I - P^T) dl, x_new >= 0, dl >= 0, dl_i x_new_i = 0.
Local-time increments are therefore explicit, which is what the hit
counters and the derivative environment downstream consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import RbmSpec

LCP_UPDATE_TOL = 1e-13
LCP_MAX_ITER = 100_000
COMPLEMENTARITY_TOL = 1e-12


class ReflectionError(RuntimeError):
    """LCP fixed point failed to converge (near-non-transient P)."""


@dataclass
class BrownianDriver:
    """Seeded stream of Gaussian increments, step-major coordinate-minor.

    Identical (seed, m, h) reproduce the stream bit-exactly.  Replication
    substreams come from sub(seed, index), which hashes (seed, index) into
    an independent generator.
    """

    seed: int
    m: int
    h: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError(f"step size h={self.h} must be positive")
        self._rng = np.random.default_rng(np.random.SeedSequence(self.seed))
        self._scale = float(np.sqrt(self.h))

    @classmethod
    def sub(cls, master_seed: int, rep_index: int, m: int, h: float) -> "BrownianDriver":
        drv = cls.__new__(cls)
        drv.seed = master_seed
        drv.m = m
        drv.h = h
        drv._rng = np.random.default_rng(np.random.SeedSequence([master_seed, rep_index]))
        drv._scale = float(np.sqrt(h))
        return drv

    def step(self) -> np.ndarray:
        """Next per-step increment vector, N(0, h) per coordinate."""
        return self._rng.standard_normal(self.m) * self._scale

    def block(self, n_steps: int) -> np.ndarray:
        """(n_steps, m) array; same stream values as n_steps step() calls."""
        return self._rng.standard_normal((n_steps, self.m)) * self._scale


def lcp_reflect(candidate: np.ndarray, P: np.ndarray,
                assert_monotone: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """One-step Skorokhod projection via the monotone fixed point.

    Iterates dl <- max(0, P^T dl - candidate) from dl = 0.  The iterates
    are entrywise non-decreasing and converge when P is transient.
    Returns (x_new, delta_ell) with x_new = candidate + (I - P^T) delta_ell.
    """
    candidate = np.asarray(candidate, dtype=float)
    if np.all(candidate >= 0.0):
        return candidate.copy(), np.zeros_like(candidate)
    ell = np.zeros_like(candidate)
    PT = P.T
    for _ in range(LCP_MAX_ITER):
        ell_new = np.maximum(0.0, PT @ ell - candidate)
        if assert_monotone and np.any(ell_new < ell - 1e-15):
            raise AssertionError("LCP iterates not monotone")
        delta = float(np.max(np.abs(ell_new - ell)))
        ell = ell_new
        if delta < LCP_UPDATE_TOL:
            x_new = np.maximum(candidate + ell - PT @ ell, 0.0)
            return x_new, ell
    raise ReflectionError(
        f"LCP fixed point not converged after {LCP_MAX_ITER} iterations")


@dataclass
class RbmPath:
    """One realized discrete path with explicit local time.

    X[j] is the state after j steps (X[0] = x0), L[j] the cumulative local
    time, hit_flags[j - 1, i] whether coordinate i's local time increased
    at step j.
    """

    spec: RbmSpec
    x0: np.ndarray
    h: float
    n_steps: int
    X: np.ndarray
    L: np.ndarray
    hit_flags: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.h

    def hit_times(self, i: int) -> np.ndarray:
        """Step-end times at which coordinate i (1-based) hit zero."""
        steps = np.nonzero(self.hit_flags[:, i - 1])[0]
        return (steps + 1) * self.h


def _n_steps(T: float, h: float) -> int:
    n = int(round(T / h))
    if abs(n * h - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"horizon T={T} is not an integer multiple of h={h}")
    return n


def simulate(spec: RbmSpec, x0: np.ndarray, T: float, h: float,
             driver: Optional[BrownianDriver] = None, seed: int = 0,
             increments: Optional[np.ndarray] = None) -> RbmPath:
    """Simulate one path of the reflected dynamics on [0, T].

    Increments may be passed explicitly (shape (n_steps, m)) to couple
    several runs on the same noise; otherwise they come from the driver.
    """
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 < 0):
        raise ValueError("start vector must be nonnegative")
    n = _n_steps(T, h)
    if increments is None:
        if driver is None:
            driver = BrownianDriver(seed=seed, m=spec.m, h=h)
        increments = driver.block(n)
    d = spec.d
    X = np.empty((n + 1, d))
    L = np.zeros((n + 1, d))
    hits = np.zeros((n, d), dtype=bool)
    X[0] = x0
    drift = spec.mu * h
    D = spec.D
    x = x0.copy()
    for j in range(n):
        candidate = x + drift + D @ increments[j]
        x, dl = lcp_reflect(candidate, spec.P)
        X[j + 1] = x
        L[j + 1] = L[j] + dl
        hits[j] = dl > 0.0
    return RbmPath(spec=spec, x0=x0, h=h, n_steps=n, X=X, L=L, hit_flags=hits)


def simulate_atlas_particles(d: int, p: float, z0: np.ndarray, T: float, h: float,
                             driver: Optional[BrownianDriver] = None, seed: int = 0,
                             noise_scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Direct particle-level simulation of d+1 ranked Brownian particles.

    The currently lowest particle gets unit drift; all particles receive
    independent Gaussian noise.  Asymmetric collisions are not modeled at
    this level, so only p = 1/2 admits a distributional cross-check with
    the gap-level reflected simulation.  Returns (positions, gaps) with
    positions (n+1, d+1) and gaps (n+1, d) = sorted adjacent differences.
    """
    if not 0.5 <= p < 1.0:
        raise ValueError(f"p={p} outside [1/2, 1)")
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (d + 1,):
        raise ValueError(f"need d+1={d + 1} particle positions, got {z0.shape}")
    n = _n_steps(T, h)
    if driver is None:
        driver = BrownianDriver(seed=seed, m=d + 1, h=h)
    Z = np.empty((n + 1, d + 1))
    Z[0] = z0
    z = z0.copy()
    for j in range(n):
        lowest = int(np.argmin(z))
        z = z + noise_scale * driver.step()
        z[lowest] += h
        Z[j + 1] = z
    gaps = np.diff(np.sort(Z, axis=1), axis=1)
    return Z, gaps


def lcp_reflect_batch(candidates: np.ndarray, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized per-step projection for a (B, d) batch of candidates.

    Same monotone fixed point as lcp_reflect, iterated jointly over the
    rows that need reflection; extra sweeps past a row's own convergence
    are harmless because the map is monotone toward the fixed point.
    """
    need = np.nonzero(candidates.min(axis=1) < 0.0)[0]
    ell = np.zeros_like(candidates)
    if need.size == 0:
        return candidates.copy(), ell
    cand = candidates[need]
    ell_s = np.zeros_like(cand)
    for _ in range(LCP_MAX_ITER):
        ell_new = np.maximum(0.0, ell_s @ P - cand)
        delta = float(np.max(np.abs(ell_new - ell_s)))
        ell_s = ell_new
        if delta < LCP_UPDATE_TOL:
            break
    else:
        raise ReflectionError(
            f"batched LCP not converged after {LCP_MAX_ITER} iterations")
    x_new = candidates.copy()
    x_new[need] = np.maximum(cand + ell_s - ell_s @ P, 0.0)
    ell[need] = ell_s
    return x_new, ell


class EnsembleResult:
    """Snapshots and optional hit record of a batch of replications."""

    def __init__(self, t_snapshots, X_snapshots, L_snapshots, hits, final_X, final_L):
        self.t_snapshots = t_snapshots          # (n_snap,)
        self.X_snapshots = X_snapshots          # (n_snap, R, A, d)
        self.L_snapshots = L_snapshots          # (n_snap, R, A, d)
        self.hits = hits                        # (R, A, n_steps, d) bool or None
        self.final_X = final_X                  # (R, A, d)
        self.final_L = final_L


def simulate_ensemble(spec: RbmSpec, starts: np.ndarray, T: float, h: float,
                      master_seed: int, t_snapshots=(), record_hits: bool = False,
                      per_step=None, rep_offset: int = 0,
                      chunk: int = 512) -> EnsembleResult:
    """Run R replications x A arms in one vectorized sweep.

    starts has shape (R, A, d); all arms of replication r consume the same
    increment stream, drawn from the sub-seed hash (master_seed, rep_offset
    + r), so arms are synchronously coupled and replications independent.
    per_step(j, X, delta_ell) is called after every step with the (R, A, d)
    state for online diagnostics.
    """
    starts = np.asarray(starts, dtype=float)
    if starts.ndim != 3 or starts.shape[2] != spec.d:
        raise ValueError(f"starts must be (R, A, {spec.d}), got {starts.shape}")
    if np.any(starts < 0):
        raise ValueError("start vectors must be nonnegative")
    R_, A, d = starts.shape
    n = _n_steps(T, h)
    snap_idx = {}
    for t in t_snapshots:
        j = int(round(t / h))
        if abs(j * h - t) > 1e-9 * max(1.0, t) or not 0 <= j <= n:
            raise ValueError(f"snapshot time {t} not on the step grid")
        snap_idx.setdefault(j, t)
    gens = [np.random.default_rng(np.random.SeedSequence([master_seed, rep_offset + r]))
            for r in range(R_)]
    scale = float(np.sqrt(h))
    X = starts.reshape(R_ * A, d).copy()
    L = np.zeros_like(X)
    drift = spec.mu * h
    DT = spec.D.T
    P = spec.P
    m = spec.m
    hits = np.zeros((R_, A, n, d), dtype=bool) if record_hits else None
    Xs, Ls, ts = [], [], []

    def snap(j):
        if j in snap_idx:
            ts.append(snap_idx[j])
            Xs.append(X.reshape(R_, A, d).copy())
            Ls.append(L.reshape(R_, A, d).copy())

    snap(0)
    j = 0
    while j < n:
        span = min(chunk, n - j)
        inc = np.empty((R_, span, m))
        for r, g in enumerate(gens):
            inc[r] = g.standard_normal((span, m))
        inc *= scale
        for jj in range(span):
            noise = inc[:, jj, :] @ DT                      # (R, d)
            cand = X + drift
            cand += np.repeat(noise, A, axis=0)
            X, dl = lcp_reflect_batch(cand, P)
            L += dl
            j += 1
            if record_hits:
                hits[:, :, j - 1, :] = (dl > 0.0).reshape(R_, A, d)
            if per_step is not None:
                per_step(j, X.reshape(R_, A, d), dl.reshape(R_, A, d))
            snap(j)
    return EnsembleResult(
        t_snapshots=np.array(ts),
        X_snapshots=np.array(Xs) if Xs else np.zeros((0, R_, A, d)),
        L_snapshots=np.array(Ls) if Ls else np.zeros((0, R_, A, d)),
        hits=hits,
        final_X=X.reshape(R_, A, d).copy(),
        final_L=L.reshape(R_, A, d).copy(),
    )


def step_residuals(path: RbmPath, increments: np.ndarray) -> np.ndarray:
    """Per-step sup-norm defect of X[j] - (X[j-1] + mu h + D dB + R dl)."""
    spec = path.spec
    R = spec.R
    res = np.empty(path.n_steps)
    for j in range(path.n_steps):
        dl = path.L[j + 1] - path.L[j]
        pred = path.X[j] + spec.mu * path.h + spec.D @ increments[j] + R @ dl
        res[j] = float(np.max(np.abs(path.X[j + 1] - pred)))
    return res


def complementarity_residuals(path: RbmPath) -> np.ndarray:
    """Per-step max of dl_i * X_i, scaled check against COMPLEMENTARITY_TOL."""
    dl = np.diff(path.L, axis=0)
    return np.max(dl * path.X[1:], axis=1)
