"""The scalar parameters threaded through the expander arguments.

Logarithms are base 2.  Quantities stay exact rationals until a caller needs
an integer (``t``, path orders, load caps); log2(n) is exact for powers of two
and otherwise the exact value of the nearest double.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional


def log2(n: int) -> Fraction:
    if n < 1:
        raise ValueError("log of a non-positive integer")
    if n & (n - 1) == 0:
        return Fraction(n.bit_length() - 1)
    return Fraction(math.log2(n))


@dataclass(frozen=True)
class ParameterSet:
    r: int
    n: int
    d: Fraction
    lam: Fraction
    epsilon: Fraction
    log_n: Fraction
    ell: Fraction
    t: int
    u: Fraction
    d_threshold: Fraction

    @property
    def max_order(self) -> int:
        return math.floor(self.ell)

    @property
    def cap(self) -> int:
        """Per-coordinate path budget floor(n / t)."""
        return self.n // self.t if self.t >= 1 else 0

    @property
    def t_ok(self) -> bool:
        return self.t >= 1

    @property
    def robust_hypotheses(self) -> bool:
        r, lam, eps = self.r, self.lam, self.epsilon
        return (
            4000 * r**4 * self.log_n < eps**2 * lam**2 * self.d
            and lam / (4 * r) <= eps
            and 0 < lam < 1
            and 0 < eps < 1
            and self.t_ok
            and self.t <= lam * self.d / (4 * r**2 * self.ell)
        )

    @property
    def cycle_hypotheses(self) -> bool:
        return self.d >= self.d_threshold and self.lam / (4 * self.r) <= self.epsilon < Fraction(1, 12)

    def to_json(self) -> dict:
        out = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in asdict(self).items()}
        out.update(
            max_order=self.max_order,
            cap=self.cap,
            t_ok=self.t_ok,
            robust_hypotheses=self.robust_hypotheses,
            cycle_hypotheses=self.cycle_hypotheses,
        )
        return out


def parameter_set(
    r: int,
    n: int,
    d=0,
    lam=None,
    epsilon=None,
    ell=None,
    t: Optional[int] = None,
) -> ParameterSet:
    """Defaults: lambda = 1/(2 log n), epsilon = 1/20, ell = 10 r log n / (eps lam),
    t = floor(lam d / (4 r^2 ell)), u = r ell t.  Any of lam, epsilon, ell, t
    may be overridden; t < 1 is reported through ``t_ok`` rather than raised."""
    if r < 2 or n < 2:
        raise ValueError(f"need r >= 2 and n >= 2, got r={r}, n={n}")
    log_n = log2(n)
    lam = Fraction(1, 2) / log_n if lam is None else Fraction(lam)
    epsilon = Fraction(1, 20) if epsilon is None else Fraction(epsilon)
    d = Fraction(d)
    if ell is None:
        ell = 10 * r * log_n / (epsilon * lam)
    ell = Fraction(ell)
    if t is None:
        t = math.floor(lam * d / (4 * r * r * ell))
    u = r * ell * t
    d_threshold = 4000 * r**5 * log_n**2 / (epsilon**3 * lam**3)
    return ParameterSet(r, n, d, lam, epsilon, log_n, ell, int(t), u, d_threshold)
