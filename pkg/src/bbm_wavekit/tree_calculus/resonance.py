"""Second-order resonances and the finite-window non-resonance certificate.

With xi = k/L, xi_j = k_j/L and k3 = k - k1 - k2, the four-wave sum
omega(xi) - omega(xi1) - omega(xi2) - omega(xi3) has numerator

    -L (k - k1) (k - k2) (k1 + k2) R,
    R = 3 L^4 + L^2 (k^2 - k k1 - k k2 + k1^2 + k1 k2 + k2^2) + k k1 k2 k3.

k = k1 is excluded (xi2 + xi3 = 0), k = k2 and k1 + k2 = 0 are the trivial
pairings, so a nontrivial resonance is an integer zero of R.  For fixed
(k, k1), R = 0 reads  k2 k3 = c / a  with a = L^2 - k k1 and
c = 3 L^4 + L^2 (k^2 - k k1 + k1^2), a quadratic in k2; the fast scan uses
this, the exhaustive scan evaluates every triple.  Both are exact integer
arithmetic on L^2 = p/q.

The certificate also evaluates the quartic
L^4 + L^2 (k2 (k1 + k2 - k) - k k1 - k1^2 - k^2) - k k1 k2 (k1 + k2 - k)
over the same triples and reports its zeros separately.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .._accel import USE_NUMBA, njit


class CertificateError(RuntimeError):
    pass


@dataclass(frozen=True)
class NonResonanceCertificate:
    L_squared: Fraction
    K: int
    window: int
    method: str
    counterexamples: tuple = ()
    quartic_zeros: tuple = ()
    min_gap: float = float("nan")
    gap_window: int = 0
    n_checked: int = 0

    @property
    def certified(self):
        return len(self.counterexamples) == 0

    def covers(self, *ks):
        return all(abs(int(k)) <= self.window for k in ks)

    def summary(self):
        return {
            "L_squared": str(self.L_squared),
            "K": self.K,
            "window": self.window,
            "method": self.method,
            "certified": self.certified,
            "counterexamples": [list(map(int, c)) for c in self.counterexamples[:20]],
            "n_counterexamples": len(self.counterexamples),
            "printed_quartic_zeros": len(self.quartic_zeros),
            "min_gap": self.min_gap,
            "gap_window": self.gap_window,
            "triples_checked": self.n_checked,
        }


def four_wave_exact(k, k1, k2, L2):
    """(omega(xi) - omega(xi1) - omega(xi2) - omega(xi3)) / L as a Fraction."""
    k3 = k - k1 - k2
    r = lambda m: Fraction(m) / (L2 + m * m)
    return r(k) - r(k1) - r(k2) - r(k3)


def resonance_factor(k, k1, k2, p, q):
    """q^2 R as an integer, for L^2 = p/q."""
    k3 = k - k1 - k2
    return (3 * p * p + p * q * (k * k - k * k1 - k * k2 + k1 * k1 + k1 * k2 + k2 * k2)
            + q * q * k * k1 * k2 * k3)


def printed_quartic(k, k1, k2, p, q):
    s = k1 + k2 - k
    return p * p + p * q * (k2 * s - k * k1 - k1 * k1 - k * k) - q * q * k * k1 * k2 * s


def is_trivial(k, k1, k2):
    k3 = k - k1 - k2
    return (k2 == k and k3 == -k1) or (k3 == k and k2 == -k1)


# ---- exhaustive scan -----------------------------------------------------

def _exhaustive_numpy(p, q, W, exclude_trivial):
    ks = np.array([j for j in range(-W, W + 1) if j != 0], dtype=np.int64)
    hits, qhits = [], []
    n = 0
    for k in ks:
        k1, k2 = np.meshgrid(ks, ks, indexing="ij")
        k3 = k - k1 - k2
        ok = (k != k1) & (k3 != 0)
        triv = ((k2 == k) & (k3 == -k1)) | ((k3 == k) & (k2 == -k1))
        if exclude_trivial:
            ok &= ~triv
        R = (3 * p * p + p * q * (k * k - k * k1 - k * k2 + k1 * k1 + k1 * k2 + k2 * k2)
             + q * q * k * k1 * k2 * k3)
        full = (k - k2) * (k1 + k2) * R
        s = k1 + k2 - k
        Q = p * p + p * q * (k2 * s - k * k1 - k1 * k1 - k * k) - q * q * k * k1 * k2 * s
        n += int(ok.sum())
        for i, j in np.argwhere(ok & (full == 0)):
            hits.append((int(k), int(k1[i, j]), int(k2[i, j])))
        for i, j in np.argwhere(ok & (Q == 0) & ~triv):
            qhits.append((int(k), int(k1[i, j]), int(k2[i, j])))
    return hits, qhits, n


@njit()
def _exhaustive_loop(p, q, W, exclude_trivial, out, qout):
    nh = 0
    nq = 0
    n = 0
    for k in range(-W, W + 1):
        if k == 0:
            continue
        for k1 in range(-W, W + 1):
            if k1 == 0 or k1 == k:
                continue
            for k2 in range(-W, W + 1):
                if k2 == 0:
                    continue
                k3 = k - k1 - k2
                if k3 == 0:
                    continue
                triv = (k2 == k and k3 == -k1) or (k3 == k and k2 == -k1)
                if exclude_trivial and triv:
                    continue
                n += 1
                R = (3 * p * p + p * q * (k * k - k * k1 - k * k2 + k1 * k1 + k1 * k2 + k2 * k2)
                     + q * q * k * k1 * k2 * k3)
                if (k - k2) * (k1 + k2) * R == 0:
                    if nh < out.shape[0]:
                        out[nh, 0] = k
                        out[nh, 1] = k1
                        out[nh, 2] = k2
                    nh += 1
                s = k1 + k2 - k
                Q = p * p + p * q * (k2 * s - k * k1 - k1 * k1 - k * k) - q * q * k * k1 * k2 * s
                if Q == 0 and not triv:
                    if nq < qout.shape[0]:
                        qout[nq, 0] = k
                        qout[nq, 1] = k1
                        qout[nq, 2] = k2
                    nq += 1
    return nh, nq, n


def _exhaustive(p, q, W, exclude_trivial, use_numba):
    if use_numba:
        cap = 200000
        out = np.zeros((cap, 3), dtype=np.int64)
        qout = np.zeros((cap, 3), dtype=np.int64)
        nh, nq, n = _exhaustive_loop(p, q, W, exclude_trivial, out, qout)
        if nh > cap or nq > cap:
            raise CertificateError("too many resonances to record")
        return ([tuple(map(int, r)) for r in out[:nh]],
                [tuple(map(int, r)) for r in qout[:nq]], int(n))
    return _exhaustive_numpy(p, q, W, exclude_trivial)


# ---- fast scan (nontrivial zeros of R only) ------------------------------

def _isqrt_exact(d):
    if d < 0:
        return -1
    r = math.isqrt(d)
    return r if r * r == d else -1


def _fast_python(p, q, W):
    hits = []
    for k in range(-W, W + 1):
        if k == 0:
            continue
        for k1 in range(-W, W + 1):
            if k1 == 0 or k1 == k:
                continue
            a = p - q * k * k1                      # q * (L^2 - k k1)
            c = 3 * p * p + p * q * (k * k - k * k1 + k1 * k1)
            den = q * a
            if a == 0 or c % den:
                continue
            P = c // den                            # k2 * k3
            S = k - k1
            r = _isqrt_exact(S * S - 4 * P)
            if r < 0 or (S + r) % 2:
                continue
            for k2 in {(S + r) // 2, (S - r) // 2}:
                k3 = S - k2
                if k2 != 0 and k3 != 0 and abs(k2) <= W and not is_trivial(k, k1, k2):
                    hits.append((k, k1, k2))
    return hits


@njit()
def _fast_loop(p, q, W, out):
    nh = 0
    for k in range(-W, W + 1):
        if k == 0:
            continue
        for k1 in range(-W, W + 1):
            if k1 == 0 or k1 == k:
                continue
            a = p - q * k * k1
            c = 3 * p * p + p * q * (k * k - k * k1 + k1 * k1)
            den = q * a
            if a == 0 or c % den != 0:
                continue
            P = c // den
            S = k - k1
            d = S * S - 4 * P
            if d < 0:
                continue
            r = np.int64(np.sqrt(np.float64(d)))
            while r * r > d:
                r -= 1
            while (r + 1) * (r + 1) <= d:
                r += 1
            if r * r != d or (S + r) % 2 != 0:
                continue
            for sgn in (1, -1):
                if sgn == -1 and r == 0:
                    continue
                k2 = (S + sgn * r) // 2
                k3 = S - k2
                triv = (k2 == k and k3 == -k1) or (k3 == k and k2 == -k1)
                if k2 != 0 and k3 != 0 and abs(k2) <= W and not triv:
                    if nh < out.shape[0]:
                        out[nh, 0] = k
                        out[nh, 1] = k1
                        out[nh, 2] = k2
                    nh += 1
    return nh


def _fast(p, q, W, use_numba):
    if use_numba:
        out = np.zeros((200000, 3), dtype=np.int64)
        nh = _fast_loop(p, q, W, out)
        if nh > out.shape[0]:
            raise CertificateError("too many resonances to record")
        return [tuple(map(int, r)) for r in out[:nh]]
    return _fast_python(p, q, W)


def min_gap(L2, W):
    """Smallest |omega(xi) - omega(xi1) - omega(xi2) - omega(xi3)| over the
    nontrivial triples with |k|, |k1|, |k2| <= W (float estimate)."""
    L = math.sqrt(L2)
    ks = np.array([j for j in range(-W, W + 1) if j != 0], dtype=float)
    om = lambda m: (m / L) / (1.0 + (m / L) ** 2)
    best = np.inf
    for k in ks:
        k1, k2 = np.meshgrid(ks, ks, indexing="ij")
        k3 = k - k1 - k2
        ok = (k != k1) & (k3 != 0) & ~(((k2 == k) & (k3 == -k1)) | ((k3 == k) & (k2 == -k1)))
        if ok.any():
            f = np.abs(om(k) - om(k1) - om(k2) - om(k3))[ok]
            best = min(best, float(f.min()))
    return best


def certify_window(spec, method="auto", window=None, exclude_trivial=True, use_numba=None,
                   gap_window=24):
    """Scan all triples with 0 < |k|, |k1|, |k2| <= 3K (or ``window``).

    ``method``: "exhaustive" checks every triple (and the printed quartic),
    "fast" solves R = 0 as a quadratic in k2, "auto" picks exhaustive for
    windows up to 60.  ``exclude_trivial=False`` keeps the trivial pairings
    in the exhaustive scan, which must then report them.
    """
    use_numba = USE_NUMBA if use_numba is None else use_numba
    L2 = spec.L_squared
    p, q = L2.numerator, L2.denominator
    W = 3 * spec.K if window is None else int(window)
    if method == "auto":
        method = "exhaustive" if W <= 60 else "fast"
    gw = min(W, gap_window)
    if method == "exhaustive":
        hits, qhits, n = _exhaustive(p, q, W, exclude_trivial, use_numba)
    elif method == "fast":
        if not exclude_trivial:
            raise ValueError("the fast scan only looks for nontrivial resonances")
        hits, qhits, n = _fast(p, q, W, use_numba), (), 0
    else:
        raise ValueError(f"unknown certificate method {method!r}")
    hits = tuple(sorted(set(hits)))
    for h in hits[:50]:
        # every reported zero must be an exact zero of the four-wave sum
        if four_wave_exact(*h, L2) != 0:
            raise CertificateError(f"scanner reported a non-resonant triple {h}")
    gap = min_gap(L2, gw) if not hits else 0.0
    return NonResonanceCertificate(L2, spec.K, W, method, hits, tuple(sorted(set(qhits))),
                                   gap, gw, n)


def is_resonant_pair(a, b, cert, L=None):
    """delta(Delta_a + Delta_b) for two nodes of one tree (NodeData).

    For a parent/child pair the answer is structural: the trivial pairing
    pattern, valid because ``cert`` excludes every other zero inside its
    window; a numeric check guards the certificate.  Other pairs are not
    covered by the lemma and are decided on the exact rationals.
    """
    if cert is None:
        raise CertificateError("no non-resonance certificate supplied")
    if not cert.certified:
        raise CertificateError("window is not certified (nontrivial resonances exist)")
    if a.label[:-1] == b.label and len(a.label) == len(b.label) + 1:
        child, parent = a, b
    elif b.label[:-1] == a.label and len(b.label) == len(a.label) + 1:
        child, parent = b, a
    else:
        return a.d + b.d == 0
    if child.k == 0 or parent.k == 0:
        return False
    sib = parent.k_right if child.label[-1] == 1 else parent.k_left
    k, k2, k3 = parent.k, child.k_left, child.k_right
    if not cert.covers(k, sib, k2, k3):
        raise CertificateError("frequencies outside the certified window")
    trivial = (k2 == k and k3 == -sib) or (k3 == k and k2 == -sib)
    if L is not None:
        val = abs(L * float(parent.d + child.d))
        if trivial and val > 1e-12:
            raise CertificateError("trivial pairing with nonzero Delta sum")
        inside = max(abs(k), abs(sib), abs(k2)) <= cert.gap_window
        if not trivial and inside and val < cert.min_gap * (1 - 1e-9):
            raise CertificateError("Delta sum below the certified gap")
    return trivial
