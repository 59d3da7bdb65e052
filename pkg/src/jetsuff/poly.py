"""Exact multivariate polynomials with rational (or float) coefficients.

A polynomial in ``n`` variables is a mapping from exponent tuples to
coefficients, e.g. ``x0**2 * x1`` in 3 variables is ``{(2, 1, 0): 1}``.
Coefficients are :class:`fractions.Fraction` whenever the inputs allow it,
so differentiation, Taylor shifts and truncation are exact.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

Exponents = tuple[int, ...]


def _as_coeff(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    return float(c)


class Poly:
    """Immutable dense-exponent sparse-term polynomial in ``n`` variables."""

    __slots__ = ("n", "terms", "_fast")

    def __init__(self, n: int, terms: dict[Exponents, object] | None = None):
        if n < 1:
            raise ValueError("need at least one variable")
        clean: dict[Exponents, object] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != n or any(k < 0 for k in e):
                raise ValueError(f"bad exponent tuple {e} for n={n}")
            c = _as_coeff(c)
            if c != 0:
                clean[e] = clean.get(e, 0) + c if e in clean else c
        self.n = n
        self.terms = {e: c for e, c in clean.items() if c != 0}
        self._fast = None

    @classmethod
    def zero(cls, n: int) -> "Poly":
        return cls(n, {})

    @classmethod
    def variable(cls, n: int, i: int) -> "Poly":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): 1})

    @classmethod
    def constant(cls, n: int, c) -> "Poly":
        return cls(n, {(0,) * n: c})

    # ------------------------------------------------------------------ algebra

    def __add__(self, other: "Poly") -> "Poly":
        if self.n != other.n:
            raise ValueError("variable count mismatch")
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return Poly(self.n, terms)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(-1)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.n != other.n:
            raise ValueError("variable count mismatch")
        terms: dict[Exponents, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Poly(self.n, terms)

    def scale(self, c) -> "Poly":
        c = _as_coeff(c)
        return Poly(self.n, {e: v * c for e, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Poly(n={self.n}, terms={self.terms!r})"

    # ------------------------------------------------------------------ calculus

    def deriv(self, i: int) -> "Poly":
        """Exact partial derivative with respect to variable ``i``."""
        terms: dict[Exponents, object] = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            d = list(e)
            d[i] -= 1
            terms[tuple(d)] = c * e[i]
        return Poly(self.n, terms)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def truncated(self, k: int) -> "Poly":
        """Drop every term of total degree above ``k``."""
        return Poly(self.n, {e: c for e, c in self.terms.items() if sum(e) <= k})

    def shifted(self, a) -> "Poly":
        """Return q with q(u) = p(a + u), expanded exactly.

        Float entries of ``a`` are converted to Fraction exactly, so the
        shift itself introduces no rounding when coefficients are rational.
        """
        a = [Fraction(x) if not isinstance(x, Fraction) else x for x in a]
        out = Poly.zero(self.n)
        for e, c in self.terms.items():
            term = Poly.constant(self.n, c)
            for i, ei in enumerate(e):
                if ei == 0:
                    continue
                # (a_i + u_i)^ei by binomial expansion
                fac = Poly(self.n, {
                    tuple(j if v == i else 0 for v in range(self.n)):
                        Fraction(math.comb(ei, j)) * a[i] ** (ei - j)
                    for j in range(ei + 1)
                })
                term = term * fac
            out = out + term
        return out

    # ------------------------------------------------------------------ evaluation

    def _fast_arrays(self):
        if self._fast is None:
            if self.terms:
                exps = np.array(list(self.terms.keys()), dtype=np.int64)
                coeffs = np.array([float(c) for c in self.terms.values()])
            else:
                exps = np.zeros((0, self.n), dtype=np.int64)
                coeffs = np.zeros(0)
            self._fast = (exps, coeffs)
        return self._fast

    def eval(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"point dimension {x.shape} != ({self.n},)")
        exps, coeffs = self._fast_arrays()
        if exps.shape[0] == 0:
            return 0.0
        return float(np.prod(x[None, :] ** exps, axis=1) @ coeffs)

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at rows of ``X`` (shape (N, n))."""
        X = np.asarray(X, dtype=float)
        exps, coeffs = self._fast_arrays()
        if exps.shape[0] == 0:
            return np.zeros(X.shape[0])
        return np.prod(X[:, None, :] ** exps[None, :, :], axis=2) @ coeffs

    def eval_exact(self, x):
        """Evaluate with Fraction arithmetic (x entries coerced to Fraction)."""
        x = [Fraction(v) if not isinstance(v, Fraction) else v for v in x]
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for xi, ei in zip(x, e):
                if ei:
                    v = v * xi ** ei
            total = total + v
        return total
