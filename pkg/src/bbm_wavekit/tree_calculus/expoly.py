"""Exponential polynomials  sum c t^p e^{i theta t}  with exact frequency keys.

Frequencies are of the form theta = L * q with q rational (every omega and
Delta on the torus is L times a rational function of the mode indices once
L^2 is rational), so q is stored as a Fraction and theta = 0 is decided
exactly.
"""
from fractions import Fraction
import math

import numpy as np


class ExpPoly:
    __slots__ = ("L", "terms")

    def __init__(self, L, terms=None):
        self.L = float(L)
        self.terms = {}
        for (p, q), c in (terms or {}).items():
            self._add(p, q, c)

    def _add(self, p, q, c):
        if c == 0:
            return
        key = (int(p), Fraction(q))
        v = self.terms.get(key, 0j) + complex(c)
        if v == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = v

    @classmethod
    def constant(cls, L, c=1.0):
        return cls(L, {(0, Fraction(0)): c})

    def copy(self):
        e = ExpPoly(self.L)
        e.terms = dict(self.terms)
        return e

    def __add__(self, other):
        out = self.copy()
        for (p, q), c in other.terms.items():
            out._add(p, q, c)
        return out

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            out = ExpPoly(self.L)
            for (p1, q1), c1 in self.terms.items():
                for (p2, q2), c2 in other.terms.items():
                    out._add(p1 + p2, q1 + q2, c1 * c2)
            return out
        out = ExpPoly(self.L)
        for key, c in self.terms.items():
            out._add(*key, c * other)
        return out

    __rmul__ = __mul__

    def shift(self, q):
        """Multiply by e^{i L q t}."""
        out = ExpPoly(self.L)
        for (p, q0), c in self.terms.items():
            out._add(p, q0 + q, c)
        return out

    def integrate(self):
        """t -> int_0^t (self)(s) ds, term by term."""
        out = ExpPoly(self.L)
        for (p, q), c in self.terms.items():
            if q == 0:
                out._add(p + 1, 0, c / (p + 1))
                continue
            a = 1j * self.L * float(q)
            # int_0^t s^p e^{as} ds = e^{at} sum_j (-1)^j p!/(p-j)! t^{p-j}/a^{j+1} - (-1)^p p!/a^{p+1}
            for j in range(p + 1):
                coef = (-1) ** j * math.factorial(p) / math.factorial(p - j) / a ** (j + 1)
                out._add(p - j, q, c * coef)
            out._add(0, 0, -c * (-1) ** p * math.factorial(p) / a ** (p + 1))
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        val = np.zeros(t.shape, dtype=np.complex128)
        for (p, q), c in self.terms.items():
            val = val + c * t ** p * np.exp(1j * self.L * float(q) * t)
        return val if val.shape else complex(val)

    def degree(self):
        """Largest power of t among the secular (theta = 0) terms."""
        ps = [p for (p, q) in self.terms if q == 0]
        return max(ps) if ps else -1

    def secular_coefficient(self, p):
        return self.terms.get((p, Fraction(0)), 0j)

    def max_power(self):
        return max((p for p, _ in self.terms), default=-1)

    def __repr__(self):
        return f"ExpPoly({len(self.terms)} terms)"
