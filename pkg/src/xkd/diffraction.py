"""Far-field diffraction orders of the standing-wave phase grating.

In the thin-grating (Raman-Nath) limit the interaction only imprints a
position-dependent phase, ``exp(i U(X) tau / hbar)``.  Expanding each
Fourier component of the phase with the Jacobi-Anger identities

    exp(i xi cos phi) = sum_n  i^n J_n(xi) exp(i n phi)
    exp(i xi sin phi) = sum_n      J_n(xi) exp(i n phi)

turns the exit wave into a discrete comb of momentum components spaced by
the grating wavevector k_L.  A pure ``cos^2`` grating gives amplitude
``i^n J_n(theta0)`` at order q = 2n; with the induced-quadrupole terms the
amplitude at order q becomes a four-fold convolution

    A(q) = sum_{2n+2m+4l+4r=q} i^(n+r) J_n(t0) J_m(tA2) J_l(tA4) J_r(tC4)

evaluated here as three successive 1-D convolutions of truncated Bessel
rows.  Only even q ever appear (the potential contains only the 2k_L and
4k_L harmonics).

Conventions:

* Orders q are multiples of k_L *relative to the incident wavevector k0*;
  k0 itself is carried only as pattern metadata.
* The overall phase ``exp(i (U0/2 + UC/8) tau / hbar)`` is reported in
  ``global_phase`` and never multiplied into the amplitudes, which keeps
  analytic patterns directly comparable with the Fourier oracle.
* Truncation starts from N = ceil(|xi| + 8 |xi|^(1/3) + 12) per Bessel row
  (J_n dies super-exponentially past n ~ xi) and is then widened until the
  discarded probability is below the requested tolerance.

:func:`phase_grating_oracle` is an independent check on all of the above:
it samples the exit wave on a grid over one full spatial period 2 pi / k_L
and reads the order amplitudes off a discrete Fourier transform, never
touching the Bessel layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR
from .potentials import PotentialModel, evaluate_potential

__all__ = [
    "TruncationError",
    "PhaseSet",
    "DiffractionPattern",
    "bessel_J",
    "phases_from_potential",
    "dipole_pattern",
    "quadrupole_pattern",
    "phase_grating_oracle",
    "intensities_csv",
    "pattern_to_dict",
]

_MAX_BESSEL_ARG = 1e4
_MAX_HALF_ORDERS = 20000

# exact unit values of i**n, indexed by n mod 4
_I_POW = np.array([1.0 + 0.0j, 0.0 + 1.0j, -1.0 + 0.0j, 0.0 - 1.0j])


class TruncationError(RuntimeError):
    """Requested tolerance unreachable within the series cap; the phase
    magnitude is outside the physically sensible range."""


# ---------------------------------------------------------------------------
# Bessel functions of the first kind
# ---------------------------------------------------------------------------

def _bessel_row_series(x: float, nmax: int) -> np.ndarray:
    """J_0..J_nmax by the ascending power series; x in [0, 2), any nmax."""
    out = np.empty(nmax + 1)
    half = 0.5 * x
    term0 = 1.0
    for n in range(nmax + 1):
        # term0 = (x/2)^n / n!, built multiplicatively so underflow is graceful
        s = term0
        term = term0
        k = 0
        while True:
            k += 1
            term *= -(half * half) / (k * (n + k))
            s += term
            if abs(term) <= 1e-18 * abs(s) or term == 0.0:
                break
        out[n] = s
        term0 *= half / (n + 1)
    return out


def _bessel_row_miller(x: float, nmax: int) -> np.ndarray:
    """J_0..J_nmax by downward recurrence with normalisation; x >= 2.

    Seeds the two-term recurrence high above both nmax and the turning
    point n ~ x, recurses down, and rescales on the fly to dodge overflow.
    The run is normalised with J_0 + 2 sum_k J_2k = 1, which fixes the
    arbitrary seed to better than a few ulps of the dominant orders.
    """
    top = max(nmax, int(math.ceil(x)))
    start = top + 24 + int(12.0 * (0.5 * max(nmax, x)) ** (1.0 / 3.0))
    j = np.zeros(start + 2)
    j[start] = 1e-30
    for k in range(start, 0, -1):
        j[k - 1] = (2.0 * k / x) * j[k] - j[k + 1]
        if abs(j[k - 1]) > 1e250:
            # growing downward from the tiny seed; rescale everything written
            # so far to keep the chain inside double range
            j[k - 1 :] *= 1e-250
    norm = j[0] + 2.0 * math.fsum(j[2 : start + 1 : 2])
    return j[: nmax + 1] / norm


def _bessel_row(x: float, nmax: int) -> np.ndarray:
    """J_n(x) for n = 0..nmax at non-negative x."""
    if x == 0.0:
        row = np.zeros(nmax + 1)
        row[0] = 1.0
        return row
    if x < 2.0:
        return _bessel_row_series(x, nmax)
    return _bessel_row_miller(x, nmax)


def bessel_J(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x).

    Accurate to ~1e-13 relative (1e-15 absolute near zeros) for |n| <= 200;
    the argument is restricted to |x| <= 1e4.  Uses the ascending series for
    small arguments and normalised downward recurrence otherwise, so the
    reflection identities J_{-n}(x) = (-1)^n J_n(x) and
    J_n(-x) = (-1)^n J_n(x) hold exactly.
    """
    n = int(n)
    x = float(x)
    if not math.isfinite(x) or abs(x) > _MAX_BESSEL_ARG:
        raise ValueError(f"bessel_J argument out of range (|x| <= {_MAX_BESSEL_ARG:g}): {x}")
    sign = 1.0
    if n < 0:
        n = -n
        if n % 2:
            sign = -sign
    if x < 0.0:
        x = -x
        if n % 2:
            sign = -sign
    return sign * float(_bessel_row(x, n)[n])


# ---------------------------------------------------------------------------
# Phase bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseSet:
    """Arguments of the four Bessel expansions, all in radians.

    theta0 drives the 2k_L cosine harmonic, thetaA2/thetaA4 the 2k_L/4k_L
    sine harmonics of a single UA (so thetaA4 = thetaA2/2 whenever both come
    from one potential), and thetaC4 the 4k_L cosine harmonic.  The order-
    independent prefactor (U0/2 + UC/8) tau / hbar equals theta0 - thetaC4
    and is stored separately as ``global_phase``.
    """

    theta0: float
    thetaA2: float = 0.0
    thetaA4: float = 0.0
    thetaC4: float = 0.0
    global_phase: float | None = None

    def __post_init__(self):
        if self.global_phase is None:
            object.__setattr__(self, "global_phase", self.theta0 - self.thetaC4)
        for name in ("theta0", "thetaA2", "thetaA4", "thetaC4", "global_phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def phases_from_potential(model: PotentialModel, tau: float) -> PhaseSet:
    """Imprinted phases for interaction time tau (s).

    theta0 = U0 tau / 2 hbar, thetaA2 = UA tau / 4 hbar,
    thetaA4 = thetaA2 / 2, thetaC4 = -UC tau / 8 hbar.
    """
    if not tau > 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    theta0 = model.U0 * tau / (2.0 * HBAR)
    theta_a2 = model.UA * tau / (4.0 * HBAR)
    theta_c4 = -model.UC * tau / (8.0 * HBAR)
    return PhaseSet(
        theta0=theta0,
        thetaA2=theta_a2,
        thetaA4=0.5 * theta_a2,
        thetaC4=theta_c4,
        global_phase=theta0 - theta_c4,
    )


# ---------------------------------------------------------------------------
# Diffraction patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiffractionPattern:
    """Per-order complex amplitudes and intensities of the exit wave.

    ``orders`` holds even momentum orders q (units of k_L, relative to the
    incident k0); ``intensities`` is elementwise |amplitude|^2.  The kept
    probability is 1 - truncation_residual.  ``odd_leakage`` is filled by
    the Fourier oracle with the largest amplitude it saw on any odd order
    (an internal-consistency diagnostic; analytic engines report 0).
    """

    orders: np.ndarray            # int, ascending
    amplitudes: np.ndarray        # complex
    truncation_order: int
    truncation_residual: float
    global_phase: float = 0.0
    k0: float = 0.0               # incident wavevector metadata, 1/m
    odd_leakage: float = 0.0
    intensities: np.ndarray = field(init=False)

    def __post_init__(self):
        orders = np.asarray(self.orders, dtype=int)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if orders.shape != amps.shape:
            raise ValueError("orders and amplitudes must have matching shape")
        if np.any(orders % 2 != 0):
            raise ValueError("only even diffraction orders can carry amplitude")
        if np.any(np.diff(orders) <= 0):
            raise ValueError("orders must be strictly ascending")
        intens = amps.real**2 + amps.imag**2
        for arr in (orders, amps, intens):
            arr.setflags(write=False)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "intensities", intens)

    def amplitude(self, q: int) -> complex:
        """Amplitude at order q (0 when q lies outside the kept support)."""
        idx = np.searchsorted(self.orders, q)
        if idx < len(self.orders) and self.orders[idx] == q:
            return complex(self.amplitudes[idx])
        return 0.0 + 0.0j

    def intensity(self, q: int) -> float:
        idx = np.searchsorted(self.orders, q)
        if idx < len(self.orders) and self.orders[idx] == q:
            return float(self.intensities[idx])
        return 0.0


def _check_tolerance(tolerance: float):
    if not (0.0 < tolerance <= 1e-3):
        raise ValueError(f"tolerance must be in (0, 1e-3], got {tolerance}")


def _rule_half_orders(xi: float) -> int:
    a = abs(xi)
    return int(math.ceil(a + 8.0 * a ** (1.0 / 3.0) + 12.0))


def _truncated_bessel(xi: float, share: float, half_orders: int | None = None) -> np.ndarray:
    """J_n(xi) for n = -N..N with the tail probability below ``share``.

    Returns the signed row (J_{-n} = (-1)^n J_n).  xi = 0 collapses to the
    exact single-entry row [1], which keeps convolutions with inactive
    terms bit-transparent.
    """
    if xi == 0.0:
        return np.array([1.0])
    if not math.isfinite(xi) or abs(xi) > _MAX_BESSEL_ARG:
        raise TruncationError(f"phase magnitude {xi!r} is outside the physical range")
    n = _rule_half_orders(xi) if half_orders is None else int(half_orders)
    while True:
        row = _bessel_row(abs(xi), n)
        tail = 1.0 - (row[0] ** 2 + 2.0 * float(np.sum(row[1:] ** 2)))
        if half_orders is not None or tail < share:
            break
        if n >= _MAX_HALF_ORDERS:
            raise TruncationError(
                f"cannot reach tolerance share {share:g} within {n} orders for "
                f"phase {xi:g}"
            )
        n = min(2 * n, _MAX_HALF_ORDERS)
    # assemble J_k(xi) for k = -n..n from the non-negative-argument row using
    # J_{-k}(x) = (-1)^k J_k(x) and J_k(-x) = (-1)^k J_k(x)
    alt = np.where(np.arange(1, n + 1) % 2 == 0, 1.0, -1.0)
    full = np.empty(2 * n + 1)
    full[n] = row[0]
    if xi > 0.0:
        full[n + 1 :] = row[1:]
        full[:n] = (alt * row[1:])[::-1]
    else:
        full[n + 1 :] = alt * row[1:]
        full[:n] = row[1:][::-1]
    return full


def _i_powers(half_orders: np.ndarray) -> np.ndarray:
    """Exact i**n for integer n of either sign."""
    return _I_POW[np.mod(half_orders, 4)]


def _dilate(row: np.ndarray, step: int) -> np.ndarray:
    """Spread a symmetric coefficient row onto a lattice of the given step."""
    if step == 1 or len(row) == 1:
        return row
    n = (len(row) - 1) // 2
    out = np.zeros(2 * n * step + 1, dtype=row.dtype)
    out[::step] = row
    return out


def dipole_pattern(
    theta0: float,
    tolerance: float = 1e-10,
    half_orders: int | None = None,
    k0: float = 0.0,
) -> DiffractionPattern:
    """Diffraction orders of the pure cos^2 grating.

    Order q = 2n carries amplitude i^n J_n(theta0), intensity J_n(theta0)^2;
    the symmetric truncation keeps the discarded probability below
    ``tolerance``.  theta0 = U0 tau / 2 hbar.  ``half_orders`` forces a
    fixed truncation instead (diagnostic hook: the reported residual is then
    whatever that support leaves out, tolerance unenforced).
    """
    _check_tolerance(tolerance)
    row = _truncated_bessel(float(theta0), tolerance, half_orders)
    n = (len(row) - 1) // 2
    half = np.arange(-n, n + 1)
    amps = _i_powers(half) * row
    residual = 1.0 - float(np.sum(row * row))
    return DiffractionPattern(
        orders=2 * half,
        amplitudes=amps,
        truncation_order=2 * n,
        truncation_residual=residual,
        global_phase=float(theta0),
        k0=k0,
    )


def quadrupole_pattern(
    phases: PhaseSet, tolerance: float = 1e-10, k0: float = 0.0
) -> DiffractionPattern:
    """Diffraction orders with the induced-quadrupole harmonics included.

    The exit wave is the product of four Jacobi-Anger combs (harmonics at
    2k_L from theta0 and thetaA2, at 4k_L from thetaA4 and thetaC4); the
    per-order amplitude is their discrete convolution, carried out in units
    of half-orders so the 4k_L rows land on even lattice sites.  With all
    quadrupole phases zero the result reproduces :func:`dipole_pattern`
    exactly, convolution against the single-entry identity row being
    transparent.
    """
    _check_tolerance(tolerance)
    share = tolerance / 8.0
    for _ in range(4):
        rows = [
            _truncated_bessel(float(phases.theta0), share),
            _truncated_bessel(float(phases.thetaA2), share),
            _truncated_bessel(float(phases.thetaA4), share),
            _truncated_bessel(float(phases.thetaC4), share),
        ]
        n0, na2, na4, nc4 = ((len(r) - 1) // 2 for r in rows)
        a = _i_powers(np.arange(-n0, n0 + 1)) * rows[0]
        b = rows[1]
        c = _dilate(rows[2], 2)
        d = _dilate(_i_powers(np.arange(-nc4, nc4 + 1)) * rows[3], 2)
        conv = a
        for other in (b, c, d):
            conv = np.convolve(conv, other)
        residual = 1.0 - float(np.sum(conv.real**2 + conv.imag**2))
        if residual < tolerance:
            break
        share /= 100.0
    else:
        raise TruncationError(
            f"cannot reach tolerance {tolerance:g} for phases {phases}"
        )
    h = (len(conv) - 1) // 2  # = n0 + na2 + 2*na4 + 2*nc4
    # drop support padding whose amplitudes underflowed to exactly zero
    nonzero = np.nonzero(conv)[0]
    h_keep = int(max(abs(nonzero - h))) if len(nonzero) else 0
    conv = conv[h - h_keep : h + h_keep + 1]
    half = np.arange(-h_keep, h_keep + 1)
    return DiffractionPattern(
        orders=2 * half,
        amplitudes=conv,
        truncation_order=2 * h_keep,
        truncation_residual=residual,
        global_phase=float(phases.global_phase),
        k0=k0,
    )


def phase_grating_oracle(
    model: PotentialModel,
    tau: float,
    grid_points: int = 16384,
    tolerance: float = 1e-10,
    k0: float = 0.0,
) -> DiffractionPattern:
    """Order amplitudes by direct Fourier analysis of exp(i U(X) tau / hbar).

    Samples the exit phase factor on a uniform grid over one full spatial
    period 2 pi / k_L (the joint period of the 2k_L and 4k_L harmonics) and
    reads amplitudes off the DFT, so the momentum order equals the harmonic
    index.  Entirely independent of the Bessel machinery; used to
    cross-validate the analytic engines.  The overall phase from the DC
    Fourier term is divided out and reported in ``global_phase`` so the
    amplitudes are directly comparable with the analytic patterns.
    """
    m = int(grid_points)
    if m < 4096 or (m & (m - 1)) != 0:
        raise ValueError(f"grid_points must be a power of two >= 4096, got {grid_points}")
    if not tau > 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    _check_tolerance(tolerance)
    x = np.arange(m) * (2.0 * math.pi / model.k_L) / m
    phase = evaluate_potential(model, x) * (tau / HBAR)
    coeff = np.fft.fft(np.exp(1j * phase)) / m
    gp = model.fourier.c_dc * tau / HBAR
    coeff = coeff * np.exp(-1j * gp)

    odd_leakage = float(np.max(np.abs(coeff[1::2])))
    # even harmonics, reordered to signed q = 2h for h = -m/4 .. m/4 - 1
    evens = coeff[::2]
    hmax = m // 4
    signed = np.concatenate([evens[hmax:], evens[:hmax]])  # h = -hmax..hmax-1
    power = signed.real**2 + signed.imag**2
    center = hmax
    # largest |amplitude|^2 strictly outside a symmetric window of half-width h
    out_right = np.zeros(len(power))
    out_right[:-1] = np.maximum.accumulate(power[::-1])[::-1][1:]
    out_left = np.zeros(len(power))
    out_left[1:] = np.maximum.accumulate(power)[:-1]
    # symmetric support wide enough that the residual is below tolerance and
    # every dropped amplitude is negligible for per-order comparisons
    kept = power[center]
    h = 0
    while 1.0 - kept >= 0.5 * tolerance or max(
        out_right[center + h], out_left[center - h]
    ) > (1e-13) ** 2:
        h += 1
        if h >= hmax - 1:
            raise TruncationError("grid too small for the requested tolerance")
        kept += power[center - h] + power[center + h]
    amps = signed[center - h : center + h + 1]
    return DiffractionPattern(
        orders=2 * np.arange(-h, h + 1),
        amplitudes=amps,
        truncation_order=2 * h,
        truncation_residual=1.0 - float(kept),
        global_phase=float(gp),
        k0=k0,
        odd_leakage=odd_leakage,
    )


def intensities_csv(pattern: DiffractionPattern) -> str:
    """Render a pattern as CSV text: order, amplitude_re, amplitude_im, intensity."""
    lines = ["order,amplitude_re,amplitude_im,intensity"]
    for q, amp, intens in zip(pattern.orders, pattern.amplitudes, pattern.intensities):
        lines.append(
            f"{int(q)},{float(amp.real)!r},{float(amp.imag)!r},{float(intens)!r}"
        )
    return "\n".join(lines) + "\n"


def pattern_to_dict(pattern: DiffractionPattern) -> dict:
    """Structured-document form of a pattern (JSON-serialisable)."""
    return {
        "orders": [int(q) for q in pattern.orders],
        "amplitude_re": [float(a.real) for a in pattern.amplitudes],
        "amplitude_im": [float(a.imag) for a in pattern.amplitudes],
        "intensities": [float(v) for v in pattern.intensities],
        "truncation_order": int(pattern.truncation_order),
        "truncation_residual": float(pattern.truncation_residual),
        "global_phase": float(pattern.global_phase),
        "k0": float(pattern.k0),
        "odd_leakage": float(pattern.odd_leakage),
    }

