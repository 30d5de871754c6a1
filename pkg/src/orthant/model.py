"""Model specifications, reflection matrices and convergence parameters.

An RBM in the nonnegative orthant is parametrized by a drift vector mu, a
diffusion factor D (with covariance Sigma = D D^T) and a reflection matrix
R = I - P^T built from a substochastic, transient routing matrix P.  This
module holds the model constructors (Atlas families, band-matrix family),
the derived quantities that control boundary-hitting rates, and numerical
checkers for the geometric-decay / bounded-entry conditions on R^{-1}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

_ATOL = 1e-10
_TRANSIENCE_MARGIN = 1e-8


class ModelError(ValueError):
    """Invalid model specification or derived-parameter failure."""


class TransienceError(ModelError):
    """Routing matrix is not transient (spectral radius too close to 1)."""


class StabilityError(ModelError):
    """Projected renormalized drift b^(k) has a non-positive entry."""

    def __init__(self, k: int, index: int, value: float):
        self.k = k
        self.index = index
        self.value = value
        super().__init__(
            f"b^({k}) has non-positive entry {value:.3e} at coordinate {index}"
        )


class BandError(ModelError):
    """Band-matrix family condition violated."""


def spectral_radius(P: np.ndarray, max_iter: int = 10_000, tol: float = 1e-12) -> float:
    """Perron-root estimate of a nonnegative matrix by power iteration.

    Iterates on P + I: the unit shift preserves nonnegativity, moves the
    Perron root to spr(P) + 1, and opens an eigenvalue gap even when the
    spectrum of P is symmetric (tridiagonal routing matrices), where plain
    power iteration oscillates.  The sup-norm ratio can also plateau for
    ~d sweeps on banded matrices, so the early stop requires the estimate
    to hold still over a window after a minimum number of sweeps.
    """
    P = np.asarray(P, dtype=float)
    d = P.shape[0]
    v = np.ones(d)
    r_prev = -1.0
    stable = 0
    min_iter = 2 * d
    for k in range(max_iter):
        w = v + P @ v
        r = float(np.max(w))
        if r <= 0.0:
            return 0.0
        v = w / r
        if k >= min_iter and abs(r - r_prev) < tol:
            stable += 1
            if stable >= 8:
                return max(r - 1.0, 0.0)
        else:
            stable = 0
        r_prev = r
    return max(r_prev - 1.0, 0.0)


_routing_cache: dict[bytes, Optional[str]] = {}


def _validate_routing(P: np.ndarray) -> None:
    key = P.tobytes()
    cached = _routing_cache.get(key)
    if cached is not None or key in _routing_cache:
        if cached:
            raise TransienceError(cached)
        return
    if len(_routing_cache) > 4096:
        _routing_cache.clear()
    try:
        _validate_routing_uncached(P)
    except TransienceError as exc:
        _routing_cache[key] = str(exc)
        raise
    _routing_cache[key] = None


def _validate_routing_uncached(P: np.ndarray) -> None:
    if np.any(P < 0):
        i, j = np.unravel_index(int(np.argmin(P)), P.shape)
        raise ModelError(f"P has negative entry at ({i + 1},{j + 1})")
    rowsums = P.sum(axis=1)
    if np.any(rowsums > 1.0 + _ATOL):
        i = int(np.argmax(rowsums))
        raise ModelError(f"P row {i + 1} sums to {rowsums[i]:.12f} > 1")
    rho = spectral_radius(P)
    if rho > 1.0 - _TRANSIENCE_MARGIN:
        raise TransienceError(f"spectral radius estimate {rho:.12f} too close to 1")


@dataclass
class RbmSpec:
    """Parameters of one reflected Brownian motion.

    d: dimension; mu: drift per unit time; P: routing matrix defining
    R = I - P^T; Sigma: diffusion covariance; D: factor with D D^T = Sigma
    (D may be d x m with m >= d); label: model name.
    """

    d: int
    mu: np.ndarray
    P: np.ndarray
    Sigma: np.ndarray
    D: np.ndarray
    label: str = "rbm"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float).reshape(self.d)
        self.P = np.asarray(self.P, dtype=float).reshape(self.d, self.d)
        self.Sigma = np.asarray(self.Sigma, dtype=float).reshape(self.d, self.d)
        self.D = np.asarray(self.D, dtype=float)
        if self.D.ndim != 2 or self.D.shape[0] != self.d:
            raise ModelError(f"D must be {self.d} x m, got shape {self.D.shape}")
        _validate_routing(self.P)
        if not np.allclose(self.Sigma, self.Sigma.T, atol=_ATOL):
            raise ModelError("Sigma is not symmetric")
        eigmin = float(np.linalg.eigvalsh(self.Sigma)[0])
        if eigmin <= 0:
            raise ModelError(f"Sigma is not positive definite (lambda_min={eigmin:.3e})")
        gap = float(np.max(np.abs(self.D @ self.D.T - self.Sigma)))
        if gap > _ATOL:
            raise ModelError(f"max |D D^T - Sigma| = {gap:.3e} exceeds {_ATOL}")

    @property
    def m(self) -> int:
        return self.D.shape[1]

    @property
    def R(self) -> np.ndarray:
        return np.eye(self.d) - self.P.T

    def sigma_diag(self) -> np.ndarray:
        """Per-coordinate noise scales sqrt(Sigma_ii)."""
        return np.sqrt(np.diag(self.Sigma))

    def restrict(self, k: int) -> "RbmSpec":
        """Northwest k x k projection (mu|_k, P|_k, D rows |_k)."""
        if not 1 <= k <= self.d:
            raise ModelError(f"restriction size {k} outside 1..{self.d}")
        return RbmSpec(
            d=k,
            mu=self.mu[:k],
            P=self.P[:k, :k],
            Sigma=self.Sigma[:k, :k],
            D=self.D[:k, :],
            label=f"{self.label}|{k}",
        )

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "mu": self.mu.tolist(),
            "P": self.P.tolist(),
            "sigma": self.Sigma.tolist(),
            "label": self.label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def _atlas_difference_factor(d: int) -> np.ndarray:
    """d x (d+1) factor mapping particle noise to gap noise."""
    D = np.zeros((d, d + 1))
    for i in range(d):
        D[i, i] = -1.0
        D[i, i + 1] = 1.0
    return D


def _atlas_sigma(d: int) -> np.ndarray:
    return 2.0 * np.eye(d) - np.eye(d, k=1) - np.eye(d, k=-1)


def _is_atlas_sigma(Sigma: np.ndarray) -> bool:
    d = Sigma.shape[0]
    return bool(np.max(np.abs(Sigma - _atlas_sigma(d))) <= _ATOL)


def build_symmetric_atlas(d: int) -> RbmSpec:
    """Gap process of d+1 ranked particles, lowest one with unit drift."""
    if d < 1:
        raise ModelError(f"dimension must be >= 1, got {d}")
    P = 0.5 * (np.eye(d, k=1) + np.eye(d, k=-1))
    mu = np.zeros(d)
    mu[0] = -1.0
    return RbmSpec(
        d=d, mu=mu, P=P, Sigma=_atlas_sigma(d), D=_atlas_difference_factor(d),
        label=f"symmetric_atlas_d{d}",
    )


def build_asymmetric_atlas(d: int, p: float) -> RbmSpec:
    """Same gap dynamics with asymmetric collision split p in (1/2, 1)."""
    if d < 1:
        raise ModelError(f"dimension must be >= 1, got {d}")
    if not 0.5 < p < 1.0:
        raise ModelError(f"collision parameter p={p} outside (1/2, 1)")
    P = p * np.eye(d, k=1) + (1.0 - p) * np.eye(d, k=-1)
    mu = np.zeros(d)
    mu[0] = -1.0
    return RbmSpec(
        d=d, mu=mu, P=P, Sigma=_atlas_sigma(d), D=_atlas_difference_factor(d),
        label=f"asymmetric_atlas_d{d}_p{p:g}",
        meta={"p": p},
    )


def build_band_model(d: int, j0: int, P: np.ndarray, mu: np.ndarray,
                     Sigma: np.ndarray, label: str = "band") -> RbmSpec:
    """Validated band-matrix family: P_ij = 0 for |i-j| > j0, column sums < 1.

    Column sums bounded by some alpha' < 1 guarantee geometric decay of
    R^{-1} along superdiagonals and uniformly bounded row sums.
    """
    P = np.asarray(P, dtype=float)
    for i in range(d):
        for j in range(d):
            if abs(i - j) > j0 and P[i, j] != 0.0:
                raise BandError(f"P[{i + 1},{j + 1}] nonzero outside band width {j0}")
    colsums = P.sum(axis=0)
    alpha_prime = float(np.max(colsums)) if d > 0 else 0.0
    if alpha_prime >= 1.0:
        j = int(np.argmax(colsums))
        raise BandError(f"column {j + 1} sums to {alpha_prime:.12f} >= 1")
    return RbmSpec(d=d, mu=mu, P=P, Sigma=Sigma,
                   D=np.linalg.cholesky(np.asarray(Sigma, dtype=float)),
                   label=label,
                   meta={"band_j0": j0, "band_alpha_prime": alpha_prime})


def spec_from_json_dict(doc: dict) -> RbmSpec:
    """Rebuild a spec from its JSON document.

    The factor D is not serialized: Atlas-pattern covariances get the exact
    particle-difference factor, anything else the lower-triangular root.
    """
    try:
        d = int(doc["d"])
        mu = np.asarray(doc["mu"], dtype=float)
        P = np.asarray(doc["P"], dtype=float)
        Sigma = np.asarray(doc["sigma"], dtype=float)
        label = str(doc.get("label", "rbm"))
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model document: {exc}") from exc
    if _is_atlas_sigma(Sigma.reshape(d, d)):
        D = _atlas_difference_factor(d)
    else:
        D = np.linalg.cholesky(Sigma.reshape(d, d))
    return RbmSpec(d=d, mu=mu, P=P, Sigma=Sigma, D=D, label=label)


def spec_from_json(text: str) -> RbmSpec:
    return spec_from_json_dict(json.loads(text))


def r_inverse(P: np.ndarray) -> np.ndarray:
    """(I - P^T)^{-1} by direct solve; entries of a transient P are >= 0."""
    P = np.asarray(P, dtype=float)
    _validate_routing(P)
    d = P.shape[0]
    Rinv = np.linalg.solve(np.eye(d) - P.T, np.eye(d))
    # round-off can leave tiny negative entries; the exact matrix is >= 0
    Rinv[(Rinv < 0) & (Rinv > -_ATOL)] = 0.0
    if np.any(Rinv < 0):
        raise TransienceError("R^{-1} has a significantly negative entry")
    return Rinv


def r_inverse_neumann(P: np.ndarray, tol: float = 1e-14, max_terms: int = 100_000) -> np.ndarray:
    """Independent oracle: sum of (P^T)^n truncated when terms are negligible."""
    P = np.asarray(P, dtype=float)
    d = P.shape[0]
    total = np.eye(d)
    term = np.eye(d)
    PT = P.T
    for _ in range(max_terms):
        term = term @ PT
        total += term
        if np.max(term) < tol:
            return total
    raise TransienceError("Neumann series did not converge")


def closed_form_rinv_sym(d: int, i: int, j: int) -> float:
    """Entry (i, j) of R^{-1} for the symmetric Atlas model (1-based)."""
    if not (1 <= i <= d and 1 <= j <= d):
        raise ModelError(f"index ({i},{j}) outside 1..{d}")
    if i <= j:
        return 2.0 * i * (1.0 - j / (d + 1.0))
    return 2.0 * j * (1.0 - i / (d + 1.0))


def closed_form_rinv_asym(d: int, p: float, i: int, j: int) -> float:
    """Entry (i, j) of R^{-1} for the asymmetric Atlas model (1-based).

    Expected visit counts of the +-1 random walk with up-probability p,
    killed at 0 and d+1.
    """
    if not 0.5 < p < 1.0:
        raise ModelError(f"collision parameter p={p} outside (1/2, 1)")
    if not (1 <= i <= d and 1 <= j <= d):
        raise ModelError(f"index ({i},{j}) outside 1..{d}")
    q = 1.0 - p
    r = q / p
    if i <= j:
        return (r ** (j - i) / (p - q)) * (1.0 - r ** i) * (1.0 - r ** (d + 1 - j)) / (1.0 - r ** (d + 1))
    s = p / q
    return (s ** (i - j) / (p - q)) * (s ** j - 1.0) * (s ** (d + 1 - i) - 1.0) / (s ** (d + 1) - 1.0)


@dataclass
class DerivedParams:
    """Hitting-rate parameters of the k-dimensional projected system."""

    k: int
    b_k: np.ndarray          # renormalized drift -(R|_k)^{-1} mu|_k
    b_low_k: float           # min_i b^(k)_i
    a_k: float               # max_i (1/b_i) sum_j (R|_k)^{-1}_{ij} sigma_j
    T_k: float               # 1 + a_k^2 log(2k)
    Lambda_k: float          # a_k^{-2}
    sigma_lo: float
    sigma_hi: float


def derived_params(spec: RbmSpec, k: int) -> DerivedParams:
    """Compute b^(k), a^(k) and the hitting parameters T^(k), Lambda^(k)."""
    if not 1 <= k <= spec.d:
        raise ModelError(f"projection size {k} outside 1..{spec.d}")
    Rinv_k = r_inverse(spec.P[:k, :k])
    b_k = -Rinv_k @ spec.mu[:k]
    bad = np.nonzero(b_k <= 1e-12)[0]
    if bad.size:
        i = int(bad[0])
        raise StabilityError(k, i + 1, float(b_k[i]))
    sigma = spec.sigma_diag()
    a_k = float(np.max((Rinv_k @ sigma[:k]) / b_k))
    return DerivedParams(
        k=k,
        b_k=b_k,
        b_low_k=float(np.min(b_k)),
        a_k=a_k,
        T_k=1.0 + a_k ** 2 * math.log(2.0 * k),
        Lambda_k=a_k ** -2,
        sigma_lo=float(np.min(sigma)),
        sigma_hi=float(np.max(sigma)),
    )


@dataclass
class ConditionResult:
    holds: bool
    margin: float            # worst slack; negative means violated by |margin|
    witness: Optional[tuple] = None  # (i, j) or (k,) of the worst case


@dataclass
class AssumptionReport:
    """Outcome of checking the decay/boundedness conditions on R^{-1}.

    Conditions (for supplied candidate constants):
      I   (R^{-1})_ij <= C alpha^{j-i} for i <= j
      II  (R^{-1})_ij <= M everywhere
      II' row sums of R^{-1} bounded by M (bounded_row mode only)
      III b_low^(k) >= b0 k^{-r*} for k = k0..d
      IV  sigma_i in [sigma_lo, sigma_hi]
    Also carries the tail constants L1, L2 and the contraction constants
    (C_tilde, C_tilde_prime, C_prime, lambda) for the supplied beta, delta.
    """

    mode: str
    holds_I: bool
    holds_II: bool
    holds_III: bool
    holds_IV: bool
    holds_IIprime: Optional[bool]
    conditions: dict
    C: float
    alpha: float
    M: float
    b0: float
    r_star: float
    k0: int
    beta: float
    delta: float
    L1: float
    L2: float
    C_tilde: float
    C_tilde_prime: float
    C_prime: float
    lam: float

    @property
    def holds_all(self) -> bool:
        core = self.holds_I and self.holds_II and self.holds_III and self.holds_IV
        if self.mode == "bounded_row":
            return core and bool(self.holds_IIprime)
        return core

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["holds_all"] = self.holds_all
        doc["conditions"] = {
            name: {"holds": c.holds, "margin": c.margin, "witness": c.witness}
            for name, c in self.conditions.items()
        }
        return doc


def contraction_constants(C: float, M: float, alpha: float, beta: float,
                          delta: float) -> tuple[float, float, float, float]:
    """Explicit local-contraction constants for given beta in (alpha,1), delta in (beta,1).

    Returns (C_tilde, C_tilde_prime, C_prime, lambda) with
    C_tilde  = M/((1-delta)(1-beta/delta)) + C(alpha/delta)/((1-alpha/delta)(1-beta/delta))
    C_tilde' = 1 v [C/(1-alpha/beta) + M beta/(1-beta)]
    C_prime  = 2 C_tilde' C_tilde,  lambda = 1 - 1/(2 C_tilde').
    """
    if not alpha < beta < 1.0:
        raise ModelError(f"beta={beta} outside (alpha, 1) = ({alpha}, 1)")
    if not beta < delta < 1.0:
        raise ModelError(f"delta={delta} outside (beta, 1) = ({beta}, 1)")
    c_tilde = M / ((1.0 - delta) * (1.0 - beta / delta)) \
        + C * (alpha / delta) / ((1.0 - alpha / delta) * (1.0 - beta / delta))
    c_tilde_prime = max(1.0, C / (1.0 - alpha / beta) + M * beta / (1.0 - beta))
    c_prime = 2.0 * c_tilde_prime * c_tilde
    lam = 1.0 - 1.0 / (2.0 * c_tilde_prime)
    return c_tilde, c_tilde_prime, c_prime, lam


def tail_constants(alpha: float, k0: int, r_star: float, d: int) -> tuple[float, float]:
    """L1 = k0^{r*+1} + sum_{i=k0}^d i^{3+r*} alpha^{i/8}, L2 analogous with i^{2+r*}."""
    i = np.arange(k0, d + 1, dtype=float)
    w = alpha ** (i / 8.0)
    L1 = k0 ** (r_star + 1.0) + float(np.sum(i ** (3.0 + r_star) * w))
    L2 = k0 ** r_star + float(np.sum(i ** (2.0 + r_star) * w))
    return L1, L2


def check_assumptions(spec: RbmSpec, constants: dict, mode: str = "main",
                      beta: Optional[float] = None,
                      delta: Optional[float] = None,
                      tol: float = 1e-9) -> AssumptionReport:
    """Verify candidate constants (C, alpha, M, b0, r_star, k0, sigma bounds).

    This is a verification against supplied constants, not a fit.  beta and
    delta default to sqrt(alpha) and alpha^{1/4}.
    """
    if mode not in ("main", "bounded_row"):
        raise ModelError(f"unknown mode {mode!r}")
    C = float(constants["C"])
    alpha = float(constants["alpha"])
    M = float(constants["M"])
    b0 = float(constants["b0"])
    r_star = float(constants.get("r_star", 0.0))
    k0 = int(constants.get("k0", 2))
    sigma_lo = float(constants["sigma_lo"])
    sigma_hi = float(constants["sigma_hi"])
    if not 0.0 < alpha < 1.0:
        raise ModelError(f"alpha={alpha} outside (0, 1)")
    beta = math.sqrt(alpha) if beta is None else float(beta)
    delta = alpha ** 0.25 if delta is None else float(delta)

    d = spec.d
    Rinv = r_inverse(spec.P)
    conditions: dict[str, ConditionResult] = {}

    # I: geometric decay above the diagonal
    ii, jj = np.triu_indices(d)
    slack_I = C * alpha ** (jj - ii) - Rinv[ii, jj]
    w = int(np.argmin(slack_I))
    conditions["I"] = ConditionResult(
        holds=bool(slack_I[w] >= -tol),
        margin=float(slack_I[w]),
        witness=(int(ii[w]) + 1, int(jj[w]) + 1),
    )

    # II: uniform entry bound
    slack_II = M - Rinv
    i2, j2 = np.unravel_index(int(np.argmin(slack_II)), slack_II.shape)
    conditions["II"] = ConditionResult(
        holds=bool(slack_II[i2, j2] >= -tol),
        margin=float(slack_II[i2, j2]),
        witness=(int(i2) + 1, int(j2) + 1),
    )

    # II': uniform row-sum bound (strengthening)
    holds_IIprime = None
    if mode == "bounded_row":
        rowsums = Rinv.sum(axis=1)
        i3 = int(np.argmax(rowsums))
        conditions["IIprime"] = ConditionResult(
            holds=bool(M - rowsums[i3] >= -tol),
            margin=float(M - rowsums[i3]),
            witness=(i3 + 1,),
        )
        holds_IIprime = conditions["IIprime"].holds

    # III: power-law lower bound on the projected renormalized drift
    worst = ConditionResult(holds=True, margin=math.inf, witness=None)
    for k in range(min(k0, d), d + 1):
        dp = derived_params(spec, k)
        slack = dp.b_low_k - b0 * k ** (-r_star)
        if slack < worst.margin:
            worst = ConditionResult(holds=bool(slack >= -tol), margin=float(slack),
                                    witness=(k,))
    conditions["III"] = worst

    # IV: uniform ellipticity of the noise scales
    sigma = spec.sigma_diag()
    lo_slack = float(np.min(sigma) - sigma_lo)
    hi_slack = float(sigma_hi - np.max(sigma))
    m4 = min(lo_slack, hi_slack)
    conditions["IV"] = ConditionResult(
        holds=bool(m4 >= -tol), margin=m4,
        witness=(int(np.argmin(sigma)) + 1 if lo_slack <= hi_slack
                 else int(np.argmax(sigma)) + 1,),
    )

    L1, L2 = tail_constants(alpha, k0, r_star, d)
    c_tilde, c_tilde_prime, c_prime, lam = contraction_constants(C, M, alpha, beta, delta)

    return AssumptionReport(
        mode=mode,
        holds_I=conditions["I"].holds,
        holds_II=conditions["II"].holds,
        holds_III=conditions["III"].holds,
        holds_IV=conditions["IV"].holds,
        holds_IIprime=holds_IIprime,
        conditions=conditions,
        C=C, alpha=alpha, M=M, b0=b0, r_star=r_star, k0=k0,
        beta=beta, delta=delta,
        L1=L1, L2=L2,
        C_tilde=c_tilde, C_tilde_prime=c_tilde_prime, C_prime=c_prime, lam=lam,
    )


def suggest_alpha(spec: RbmSpec) -> tuple[float, float]:
    """Fit (C, alpha) by log-linear regression on superdiagonal maxima of R^{-1}.

    Convenience only; the checked constants are always caller-supplied.
    """
    Rinv = r_inverse(spec.P)
    d = spec.d
    offsets, vals = [], []
    for off in range(d):
        m = float(np.max(np.diagonal(Rinv, offset=off)))
        if m > 0:
            offsets.append(off)
            vals.append(math.log(m))
    if len(offsets) < 2:
        return float(np.max(Rinv)), 0.5
    slope, intercept = np.polyfit(offsets, vals, 1)
    alpha = float(np.exp(slope))
    C = float(np.exp(intercept))
    return C, min(max(alpha, 1e-12), 1.0 - 1e-12)


def _floor_power(t: float, exponent: float) -> int:
    # guard floor against round-off at exact integer powers (64^(1/3) -> 3.99..)
    v = t ** exponent
    f = math.floor(v)
    if f + 1 - v < 1e-9 * max(1.0, v):
        f += 1
    return f


def schedule_ell(t: float, d: int, r_star: float = 0.0, mode: str = "main") -> int:
    """Coordinates tracked at time t: d ^ floor(t^{1/(3+2r*)}) (main mode)."""
    if t < 0:
        raise ModelError(f"negative time {t}")
    exponent = 1.0 / (3.0 + 2.0 * r_star) if mode == "main" else 1.0 / (1.0 + 2.0 * r_star)
    return min(d, _floor_power(t, exponent)) if t > 0 else 0


def schedule_dt(t: float, d: int, r_star: float = 0.0, mode: str = "main") -> int:
    """Stationary-start variant: d ^ floor(t^{1/(4+2r*)}) (main mode)."""
    if t < 0:
        raise ModelError(f"negative time {t}")
    exponent = 1.0 / (4.0 + 2.0 * r_star) if mode == "main" else 1.0 / (1.0 + 2.0 * r_star)
    return min(d, _floor_power(t, exponent)) if t > 0 else 0


def start_set_bound(spec: RbmSpec, x: np.ndarray) -> float:
    """sup_i b_low^(i) ||x|_i||_inf, the smallest B with x in S(b, B)."""
    x = np.asarray(x, dtype=float)
    best = 0.0
    run_max = 0.0
    for i in range(1, spec.d + 1):
        run_max = max(run_max, abs(float(x[i - 1])))
        best = max(best, derived_params(spec, i).b_low_k * run_max)
    return best
