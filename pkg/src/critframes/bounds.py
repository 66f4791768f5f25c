"""Closed-form topological lower bounds, in exact integer arithmetic.

Arguments outside the ranges for which the bounds are proved are rejected
with :class:`OutOfStatedRange` instead of being extrapolated.
"""
from __future__ import annotations

import operator
from dataclasses import asdict, dataclass, field

from .errors import NotPrime, OutOfStatedRange, SpecError

__all__ = [
    "stiefel_genus",
    "config_cat_lower",
    "padic_digit_bound",
    "digit_sum",
    "critical_count_lower",
    "BoundsReport",
    "bounds_report",
]

MAX_ARG = 10**6


def _int(name, value):
    if isinstance(value, bool):
        raise SpecError(f"{name} must be an integer, got {value!r}")
    try:
        return operator.index(value)
    except TypeError:
        raise SpecError(f"{name} must be an integer, got {value!r}") from None


def _bounded(name, value, lo, hi=MAX_ARG):
    value = _int(name, value)
    if not lo <= value <= hi:
        raise OutOfStatedRange(f"{name}={value} outside [{lo}, {hi}]")
    return value


def stiefel_genus(n, k):
    """W_k-genus of V_k(R^n), equal to cat V_k(R^n)/W_k: ``nk - k(k+1)/2 + 1``."""
    n = _bounded("n", n, 3)
    k = _bounded("k", k, 1, n)
    return n * k - k * (k + 1) // 2 + 1


def config_cat_lower(d, k):
    """Lower bound ``dk - k(k-1)/2 + 1`` for cat B(RP^d, k)."""
    d = _bounded("d", d, 3)
    k = _bounded("k", k, 1, d + 1)
    return d * k - k * (k - 1) // 2 + 1


def _is_prime(p):
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def digit_sum(k, p):
    """Sum of the base-``p`` digits of ``k``."""
    k, p = _int("k", k), _int("p", p)
    if k < 0 or p < 2:
        raise SpecError("digit_sum needs k >= 0 and base >= 2")
    s = 0
    while k:
        k, r = divmod(k, p)
        s += r
    return s


def padic_digit_bound(d, k, p):
    """The competing configuration-space bound ``(d-1)(k - D_p(k)) + 1``."""
    p = _int("p", p)
    if not _is_prime(p):
        raise NotPrime(f"{p} is not prime")
    d = _bounded("d", d, 2)
    k = _bounded("k", k, 1)
    return (d - 1) * (k - digit_sum(k, p)) + 1


def critical_count_lower(n):
    """Guaranteed number of critical orbits on the n-frame manifold: ``n(n-1)/2 + 1``."""
    n = _bounded("n", n, 2)
    return n * (n - 1) // 2 + 1


@dataclass
class BoundsReport:
    n: int
    k: int
    d: int | None
    primes: list
    genus: int
    cat_quotient: int
    config_cat_lower: int | None
    digit_sum_bounds: dict = field(default_factory=dict)
    best_bound: int = 0
    critical_count_lower: int = 0

    def to_dict(self):
        d = asdict(self)
        d["digit_sum_bounds"] = {str(p): v for p, v in self.digit_sum_bounds.items()}
        return d


def bounds_report(n, k, d=None, primes=(2, 3, 5)):
    """Evaluate every bound for the given arguments.

    ``d`` defaults to ``n - 1``: V_k(R^n) sits inside the configuration
    space of k points in RP^(n-1).  The configuration bound is omitted when
    ``d < 3``.
    """
    genus = stiefel_genus(n, k)
    if d is None:
        d = n - 1
    d = _int("d", d)
    cfg = config_cat_lower(d, k) if d >= 3 and k <= d + 1 else None
    digits = {}
    if d >= 2:
        for p in primes:
            digits[_int("p", p)] = padic_digit_bound(d, k, p)
    candidates = [genus] + ([cfg] if cfg is not None else []) + list(digits.values())
    return BoundsReport(
        n=n,
        k=k,
        d=d,
        primes=[int(p) for p in primes],
        genus=genus,
        cat_quotient=genus,
        config_cat_lower=cfg,
        digit_sum_bounds=digits,
        best_bound=max(candidates),
        critical_count_lower=critical_count_lower(n),
    )
