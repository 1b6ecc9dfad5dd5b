"""Closed-form values and bounds for r_k(M_n) and d_k(M_n)."""

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParameterError

DEFAULT_C = 0.01
CSV_COLUMNS = ["n", "k", "r_k", "d_k_upper", "d_k_tomiyama", "d_k_prob", "c"]


def r_k_exact(n, k):
    """(2n - k)/k for k <= n, and 1 once k >= n."""
    if n < 1 or k < 1:
        raise ParameterError(f"need positive n and k, got n={n}, k={k}")
    if k >= n:
        return Fraction(1)
    return Fraction(2 * n - k, k)


def d_k_upper(n, k):
    if k == 1:
        return Fraction(n)
    return r_k_exact(n, k)


def tomiyama_cb(n, k):
    """cb norm of the Tomiyama map: 1 + 2(n-k)/(n(nk-1)); None when nk = 1."""
    if n * k <= 1:
        return None
    return 1 + Fraction(2 * (n - k), n * (n * k - 1))


@dataclass(frozen=True)
class BoundsRow:
    n: int
    k: int
    r_k_exact: Fraction
    d_k_upper: Fraction
    d_k_tomiyama_lower: Fraction
    d_k_prob_lower: float
    c_constant: float

    def as_dict(self):
        def dec(x):
            return None if x is None else float(x)

        return {
            "n": self.n,
            "k": self.k,
            "r_k": dec(self.r_k_exact),
            "d_k_upper": dec(self.d_k_upper),
            "d_k_tomiyama": dec(self.d_k_tomiyama_lower),
            "d_k_prob": self.d_k_prob_lower,
            "c": self.c_constant,
        }


def d_k_bounds(n, k, c=DEFAULT_C):
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got n={n}, k={k}")
    if c <= 0:
        raise ParameterError("c must be positive")
    return BoundsRow(
        n=n,
        k=k,
        r_k_exact=r_k_exact(n, k),
        d_k_upper=d_k_upper(n, k),
        d_k_tomiyama_lower=tomiyama_cb(n, k),
        d_k_prob_lower=c * math.sqrt(n / k),
        c_constant=c,
    )


def table(n_range, k_range, c=DEFAULT_C):
    ks = sorted(set(k_range))
    return [d_k_bounds(n, k, c) for n in sorted(set(n_range)) for k in ks if k <= n]


def _fmt(x):
    return "" if x is None else f"{x:.9g}"


def to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        d = row.as_dict()
        w.writerow([d["n"], d["k"]] + [_fmt(d[col]) for col in CSV_COLUMNS[2:]])
    return buf.getvalue()


def to_json(rows):
    return {"schema": "kpos/1", "rows": [row.as_dict() for row in rows]}
