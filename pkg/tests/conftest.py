"""Shared test oracles and helpers.

The Bessel reference here is an explicit ascending power series summed in
50-digit arithmetic with mpmath; it shares no code with the package's
Bessel layer (series in double precision for tiny arguments, normalised
downward recurrence otherwise), so agreement is meaningful.
"""

import mpmath as mp
import pytest


def bessel_series_oracle(n: int, x: float, dps: int = 50) -> float:
    """J_n(x) from the ascending power series in extended precision."""
    if abs(x) > 40:
        # the alternating series cancels catastrophically out there; this
        # oracle is meant for the moderate-argument accuracy contract
        raise ValueError("series oracle restricted to |x| <= 40")
    with mp.workdps(dps):
        n = int(n)
        sign = 1.0
        if n < 0:
            n = -n
            if n % 2:
                sign = -sign
        xm = mp.mpf(repr(float(x)))
        if xm < 0:
            xm = -xm
            if n % 2:
                sign = -sign
        term = (xm / 2) ** n / mp.factorial(n)
        total = mp.mpf(0)
        k = 0
        while True:
            total += term
            k += 1
            term *= -((xm / 2) ** 2) / (k * (n + k))
            if abs(term) < mp.mpf("1e-60") * max(abs(total), mp.mpf("1e-60")):
                break
            if k > 2000:
                raise RuntimeError("series oracle failed to converge")
        return sign * float(total)


def pattern_max_dev(p1, p2) -> float:
    """Largest per-order complex amplitude difference on the union support."""
    orders = sorted(set(map(int, p1.orders)) | set(map(int, p2.orders)))
    return max(abs(p1.amplitude(q) - p2.amplitude(q)) for q in orders)


@pytest.fixture(scope="session")
def bundled_species():
    from xkd.potentials import bundled_catalog

    return bundled_catalog()
