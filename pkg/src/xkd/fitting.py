"""Recover grating phases (and polarizabilities) from measured peak intensities.

The forward models are the analytic engines of :mod:`xkd.diffraction`;
fitting is weighted least squares on the per-order intensities by damped
Gauss-Newton with forward-difference derivatives (smooth, low-dimensional
problem; an accepted step never increases the weighted residual).

Identifiability caveats, all exact properties of the model and resolved by
convention or documentation rather than by the data:

* dipole model: intensities are even in theta0, so theta0 >= 0 is reported;
* quadrupole model: flipping theta0 and thetaC4 together leaves every
  intensity unchanged (it maps the potential to the reflection of its
  negative), so solutions are normalised to theta0 >= 0 by that joint flip;
* beyond sign flips, the intensities only pin down the two harmonic
  amplitudes R2 = hypot(theta0, thetaA2), R4 = hypot(thetaA2/2, thetaC4)
  and one relative phase (spatial translations of the grating drop out of
  the intensities), so a handful of distinct tied triples can reproduce a
  pattern exactly.  :func:`equivalent_triples` enumerates them; a fit
  converges to the representative nearest its starting point.

Flipping thetaA2 (with its tied 4k companion) mirrors the pattern instead,
so its sign is carried by the +q/-q asymmetry; data symmetrised over +-q
cannot determine it, which surfaces as a rank-deficient normal matrix and a
degeneracy warning, not as a silent wrong answer.

Fitted phases convert back to polarizabilities when the laser context
(intensity, wavelength) and the interaction time are known; see
:func:`polarizability_estimates`.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .constants import E2_GAUSS, HARTREE_NOMINAL, HBAR, R_BOHR
from . import diffraction
from .diffraction import PhaseSet
from .potentials import LaserGrating

__all__ = [
    "ObservedPattern",
    "FitResult",
    "PolarizabilityEstimate",
    "fit_dipole",
    "fit_quadrupole",
    "equivalent_triples",
    "polarizability_estimates",
]

DERIVATIVE_STEP = 1e-7      # rad, forward differences
MAX_ITERATIONS = 200
MAX_STEP_NORM = 0.2         # rad, trust-radius cap; keeps the fit on the
                            # alias branch nearest the starting point
STEP_TOLERANCE = 1e-10      # rad
RESIDUAL_TOLERANCE = 1e-12  # relative change
DEGENERACY_CONDITION = 1e10


@dataclass(frozen=True)
class ObservedPattern:
    """Measured (or synthetic) intensities per even diffraction order."""

    rows: tuple[tuple[int, float, float], ...]   # (order, intensity, weight)

    def __post_init__(self):
        rows = tuple((int(q), float(i), float(w)) for q, i, w in self.rows)
        object.__setattr__(self, "rows", rows)
        seen = set()
        total = 0.0
        for q, intensity, weight in rows:
            if q % 2 != 0:
                raise ValueError(f"order {q} is odd; only even orders exist")
            if q in seen:
                raise ValueError(f"duplicate order {q}")
            seen.add(q)
            if intensity < 0:
                raise ValueError(f"order {q}: intensity must be >= 0")
            if not weight > 0:
                raise ValueError(f"order {q}: weight must be > 0")
            total += intensity
        if total > 1.0 + 1e-6:
            raise ValueError(f"intensities sum to {total}, above 1")

    @property
    def orders(self) -> np.ndarray:
        return np.array([q for q, _, _ in self.rows], dtype=int)

    @property
    def intensities(self) -> np.ndarray:
        return np.array([i for _, i, _ in self.rows])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.rows])

    @classmethod
    def from_arrays(cls, orders, intensities, weights=None) -> "ObservedPattern":
        if weights is None:
            weights = np.ones(len(orders))
        return cls(rows=tuple(zip(map(int, orders), intensities, weights)))

    @classmethod
    def from_csv(cls, path: str | os.PathLike) -> "ObservedPattern":
        """Read a header-led CSV with columns order, intensity[, weight]."""
        rows = []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header[:2]] != ["order", "intensity"]:
                raise ValueError(f"{path}: expected header 'order,intensity[,weight]'")
            has_weight = len(header) >= 3 and header[2].strip() == "weight"
            for line_no, rec in enumerate(reader, start=2):
                if not rec:
                    continue
                try:
                    q = int(rec[0])
                    intensity = float(rec[1])
                    weight = float(rec[2]) if has_weight and len(rec) > 2 else 1.0
                except (ValueError, IndexError) as exc:
                    raise ValueError(f"{path}:{line_no}: bad row {rec!r}") from exc
                rows.append((q, intensity, weight))
        return cls(rows=tuple(rows))


@dataclass(frozen=True)
class FitResult:
    theta0_hat: float
    thetaA2_hat: float
    thetaC4_hat: float
    residual: float              # weighted sum of squared intensity errors
    converged: bool
    iterations: int
    covariance_note: str
    degenerate: bool = False
    param_sigma: tuple[float, ...] = ()

    @property
    def phases(self) -> PhaseSet:
        return PhaseSet(
            theta0=self.theta0_hat,
            thetaA2=self.thetaA2_hat,
            thetaA4=0.5 * self.thetaA2_hat,
            thetaC4=self.thetaC4_hat,
        )


def _dipole_model(theta: float, orders: np.ndarray) -> np.ndarray:
    return np.array(
        [diffraction.bessel_J(q // 2, theta) ** 2 for q in orders]
    )


def _quad_model(params: np.ndarray, orders: np.ndarray) -> np.ndarray:
    theta0, theta_a2, theta_c4 = (float(v) for v in params)
    pattern = diffraction.quadrupole_pattern(
        PhaseSet(theta0, theta_a2, 0.5 * theta_a2, theta_c4)
    )
    return np.array([pattern.intensity(int(q)) for q in orders])


def _gauss_newton(model, p0: np.ndarray, observed: ObservedPattern):
    """Damped Gauss-Newton core shared by both fits.

    Returns (params, residual, converged, iterations, normal_matrix).
    """
    orders = observed.orders
    y = observed.intensities
    sqrt_w = np.sqrt(observed.weights)

    def residuals(p):
        return sqrt_w * (y - model(p, orders))

    def try_residuals(p):
        # a wild trial step (flat direction of a degenerate normal matrix)
        # can leave the model's domain; report it as an unacceptable step
        try:
            return residuals(p)
        except diffraction.TruncationError:
            return None

    p = np.array(p0, dtype=float)
    r = residuals(p)
    s = float(r @ r)
    converged = False
    iterations = 0
    jtj = np.eye(len(p))
    for iterations in range(1, MAX_ITERATIONS + 1):
        jac = np.empty((len(r), len(p)))
        for j in range(len(p)):
            bumped = p.copy()
            bumped[j] += DERIVATIVE_STEP
            jac[:, j] = (residuals(bumped) - r) / DERIVATIVE_STEP
        jtj = jac.T @ jac
        rhs = -jac.T @ r
        try:
            step = np.linalg.solve(jtj, rhs)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jtj, rhs, rcond=None)
        if not np.all(np.isfinite(step)):
            break
        norm = float(np.linalg.norm(step))
        if norm > MAX_STEP_NORM:
            step = step * (MAX_STEP_NORM / norm)
        # halve the step until the weighted residual does not increase
        accepted = False
        for _ in range(60):
            candidate = p + step
            r_new = try_residuals(candidate)
            if r_new is not None:
                s_new = float(r_new @ r_new)
                if s_new <= s:
                    accepted = True
                    break
            step = 0.5 * step
        if not accepted:
            converged = True  # no descent direction left at this scale
            break
        p, r = candidate, r_new
        ds = s - s_new
        s = s_new
        if float(np.linalg.norm(step)) < STEP_TOLERANCE:
            converged = True
            break
        if ds <= RESIDUAL_TOLERANCE * max(s, 1e-300):
            converged = True
            break
    return p, s, converged, iterations, jtj


def _sigmas(jtj: np.ndarray, residual: float, n_obs: int) -> tuple[float, ...]:
    """First-order 1-sigma parameter errors from the normal matrix."""
    dof = n_obs - jtj.shape[0]
    if dof <= 0:
        return tuple(0.0 for _ in range(jtj.shape[0]))
    s2 = residual / dof
    try:
        cov = s2 * np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        return tuple(float("inf") for _ in range(jtj.shape[0]))
    return tuple(float(math.sqrt(max(v, 0.0))) for v in np.diag(cov))


def fit_dipole(observed: ObservedPattern, theta0_init: float = 0.5) -> FitResult:
    """Fit the single-phase cos^2 model I(2n) = J_n(theta0)^2.

    Needs at least two distinct observed orders.  The model is even in
    theta0, so the result is reported with theta0 >= 0.
    """
    if len(observed.rows) < 2:
        raise ValueError("need at least 2 distinct orders to fit theta0")

    def model(p, orders):
        return _dipole_model(float(p[0]), orders)

    p, s, converged, iterations, jtj = _gauss_newton(
        model, np.array([float(theta0_init)]), observed
    )
    theta0 = abs(float(p[0]))
    sigmas = _sigmas(jtj, s, len(observed.rows))
    note = (
        "theta0 reported non-negative (intensities are even in theta0); "
        f"1-sigma estimate {sigmas[0]:.3e} rad from the final normal matrix"
    )
    return FitResult(
        theta0_hat=theta0,
        thetaA2_hat=0.0,
        thetaC4_hat=0.0,
        residual=s,
        converged=converged,
        iterations=iterations,
        covariance_note=note,
        degenerate=False,
        param_sigma=(sigmas[0],),
    )


def fit_quadrupole(observed: ObservedPattern, init: PhaseSet) -> FitResult:
    """Fit (theta0, thetaA2, thetaC4) with the 4k sine phase tied to thetaA2/2.

    Needs at least four distinct orders including a +-q pair: the +-q
    asymmetry is the only carrier of the thetaA2 sign.  A normal-matrix
    condition number above 1e10 at the solution marks the fit degenerate
    (typically: symmetrised data).
    """
    if len(observed.rows) < 4:
        raise ValueError("need at least 4 distinct orders to fit the quadrupole model")
    orders = set(int(q) for q in observed.orders)
    if not any(q > 0 and -q in orders for q in orders):
        raise ValueError("need at least one +q/-q order pair to expose the asymmetry")

    p0 = np.array([init.theta0, init.thetaA2, init.thetaC4], dtype=float)
    p, s, converged, iterations, jtj = _gauss_newton(_quad_model, p0, observed)

    theta0, theta_a2, theta_c4 = (float(v) for v in p)
    if theta0 < 0:
        # joint flip is an exact symmetry of all intensities
        theta0, theta_c4 = -theta0, -theta_c4

    cond = float(np.linalg.cond(jtj))
    degenerate = not math.isfinite(cond) or cond > DEGENERACY_CONDITION
    sigmas = _sigmas(jtj, s, len(observed.rows))
    note = (
        f"normal-matrix condition number {cond:.3e}"
        + (
            f"; degeneracy warning: above {DEGENERACY_CONDITION:.0e}, some "
            "parameter combination (e.g. the thetaA2 sign under symmetrised "
            "data) is unconstrained"
            if degenerate
            else ""
        )
        + "; theta0 normalised >= 0 via the exact (theta0, thetaC4) joint flip"
    )
    return FitResult(
        theta0_hat=theta0,
        thetaA2_hat=theta_a2,
        thetaC4_hat=theta_c4,
        residual=s,
        converged=converged,
        iterations=iterations,
        covariance_note=note,
        degenerate=degenerate,
        param_sigma=sigmas,
    )


def equivalent_triples(
    theta0: float, thetaA2: float, thetaC4: float, match_tol: float = 1e-12
) -> list[tuple[float, float, float]]:
    """All tied phase triples producing exactly the given intensity pattern.

    The per-order intensities determine only the translation-invariant
    content of the imprinted phase profile
    ``theta0 cos(u) + thetaA2 sin(u) + (thetaA2/2) sin(2u) + thetaC4 cos(2u)``:
    the harmonic amplitudes ``R2 = hypot(theta0, thetaA2)`` and
    ``R4 = hypot(thetaA2/2, thetaC4)`` plus the relative phase
    ``delta = phi4 - 2 phi2`` up to the reflection class ``pi - delta``.
    Each tied triple in that class solves

        R4 sin(delta + 2 phi) = (R2 / 2) sin(phi)

    for the free angle phi; this enumerates the real roots, rebuilds the
    candidate triples, and keeps those whose pattern matches the original
    within ``match_tol`` per order.  The input triple is always included.
    """
    base = diffraction.quadrupole_pattern(
        PhaseSet(theta0, thetaA2, 0.5 * thetaA2, thetaC4)
    )
    r2 = math.hypot(theta0, thetaA2)
    r4 = math.hypot(0.5 * thetaA2, thetaC4)
    found: list[tuple[float, float, float]] = []

    def consider(candidate: tuple[float, float, float]):
        for known in found:
            if max(abs(a - b) for a, b in zip(candidate, known)) < 1e-9:
                return
        pattern = diffraction.quadrupole_pattern(
            PhaseSet(candidate[0], candidate[1], 0.5 * candidate[1], candidate[2])
        )
        qs = set(map(int, base.orders)) | set(map(int, pattern.orders))
        dev = max(abs(base.intensity(q) - pattern.intensity(q)) for q in qs)
        if dev <= match_tol:
            found.append(candidate)

    consider((theta0, thetaA2, thetaC4))
    if r2 == 0.0 and r4 == 0.0:
        return found
    phi2 = math.atan2(thetaA2, theta0)
    phi4 = math.atan2(0.5 * thetaA2, thetaC4)
    delta = phi4 - 2.0 * phi2
    for delta_c in (delta, math.pi - delta):

        def g(phi):
            return r4 * math.sin(delta_c + 2.0 * phi) - 0.5 * r2 * math.sin(phi)

        # scan a little past one period so roots sitting on the boundary
        # (where float sin(pi) != 0) are still bracketed
        step = 2.0 * math.pi / 8192
        grid = np.linspace(-math.pi, math.pi + 3 * step, 8196)
        for a, b in zip(grid[:-1], grid[1:]):
            ga, gb = g(a), g(b)
            if ga == 0.0:
                root = a
            elif ga * gb < 0.0:
                lo, hi = a, b
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if g(lo) * g(mid) <= 0.0:
                        hi = mid
                    else:
                        lo = mid
                root = 0.5 * (lo + hi)
            else:
                continue
            cand = (
                r2 * math.cos(root),
                r2 * math.sin(root),
                r4 * math.cos(delta_c + 2.0 * root),
            )
            consider(cand)
    return found


@dataclass(frozen=True)
class PolarizabilityEstimate:
    """Polarizabilities implied by fitted phases for a known laser and tau."""

    alpha: float          # m^3
    alpha_sigma: float
    A_dq: float           # units e^2 r0^3 / E_h
    A_sigma: float
    C_qq: float           # units e^2 r0^4 / E_h
    C_sigma: float


def polarizability_estimates(
    result: FitResult, laser: LaserGrating, tau: float
) -> PolarizabilityEstimate:
    """Invert the phase definitions for alpha, A_dq and C_qq.

    |U0| = 2 hbar theta0 / tau with U0 = -alpha E0^2/4;
    UA = 4 hbar thetaA2 / tau; UC = -8 hbar thetaC4 / tau.  Uncertainties
    are first-order propagation of the per-parameter sigmas.
    """
    if not tau > 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    if not laser.intensity > 0:
        raise ValueError("laser intensity must be > 0 to recover polarizabilities")
    e0_sq = laser.E0_squared
    k_l = laser.k_L
    alpha_per_rad = 8.0 * HBAR / (tau * e0_sq)
    a_per_rad = 4.0 * HBAR / (tau * E2_GAUSS * R_BOHR**3 / HARTREE_NOMINAL * k_l * e0_sq)
    c_per_rad = 8.0 * HBAR / (tau * E2_GAUSS * R_BOHR**4 / HARTREE_NOMINAL * k_l**2 * e0_sq)
    sig = list(result.param_sigma) + [0.0, 0.0, 0.0]
    return PolarizabilityEstimate(
        alpha=alpha_per_rad * result.theta0_hat,
        alpha_sigma=alpha_per_rad * sig[0],
        A_dq=a_per_rad * result.thetaA2_hat,
        A_sigma=a_per_rad * sig[1],
        C_qq=-c_per_rad * result.thetaC4_hat,
        C_sigma=c_per_rad * sig[2],
    )
