"""Paired diagrams: G_A^sigma, the K operator and the real symbols U_A^sigma.

For (A, sigma) in the paired set with n pairs (2n nodes)

    (2 pi L)^n G^(xi) = sum_{leaves summing to xi}
        prod_m [omega_{2m} omega_{2m-1} / (i Delta_{2m-1})] delta(Delta_{2m-1} + Delta_{2m}) prod a^(leaf),

and G = i K(G_1, G_2, G_3) along the decomposition that splits off the last
pair (root, child of the root).  Each G is a real multiple of a^:
G^(xi) = (-i)^n U(a, xi) a^(xi).  With that sign the paired sum of the U's
is exactly U(a, xi)^n (see ``comb_identity_check``).

Two versions of the U recursion exist.  ``mode="paired"`` sums the two
trivial-pairing families independently over every eta; it counts the
configuration eta = -xi (where both families give the same leaves) twice and
keeps the eta = xi term whose intermediate frequency is 0.  ``mode="exact"``
counts each leaf configuration once and reproduces the direct summation.
"""
from functools import lru_cache
import math

import numpy as np

from ..spectral_core import SpectralField, omega
from .trees import leaf_slices, n_leaves, n_nodes, OrderedTree
from .resonance import CertificateError


class DecompositionError(AssertionError):
    pass


@lru_cache(maxsize=None)
def decompose(tree, sigma):
    """Split (A, sigma) into the three sub-diagrams around its last pair.

    Returns (side, (A1, s1, phi1), (A2, s2, phi2), (A3, s3, phi3)) where side
    is the root child paired with the root, A1 the sibling subtree and A2, A3
    the children of the paired node; phi_k lists the 1-based positions in
    sigma of the nodes of A_k.
    """
    if len(sigma) < 2 or sigma[-1] != ():
        raise DecompositionError("sigma must end with the root")
    side = sigma[-2]
    if side not in ((1,), (2,)):
        raise DecompositionError(f"sigma(2n-1) = {side} is not a child of the root")
    other = (2,) if side == (1,) else (1,)
    parts = []
    for prefix, sub in ((other, tree[other[0] - 1]),
                        (side + (1,), tree[side[0] - 1][0]),
                        (side + (2,), tree[side[0] - 1][1])):
        pos = [i + 1 for i, m in enumerate(sigma[:-2]) if m[:len(prefix)] == prefix]
        s = tuple(sigma[i - 1][len(prefix):] for i in pos)
        # the induced position maps respect parity
        for j, i in enumerate(pos, start=1):
            if (i - j) % 2:
                raise DecompositionError("induced order does not respect parity")
        parts.append((sub, s, tuple(pos)))
    return (side,) + tuple(parts)


def _support(a):
    """Signed mode indices with nonzero amplitude."""
    ks = [k for k in range(1, a.spec.K + 1) if a.amps[k - 1] != 0]
    return sorted(ks + [-k for k in ks])


def _amp_lookup(a, ks):
    ks = np.asarray(ks)
    pos = a.amps[np.abs(ks) - 1]
    return np.where(ks > 0, pos, np.conj(pos))


def _require_cert(a, cert):
    if cert is None or not cert.certified:
        raise CertificateError("paired diagrams need a certified window")
    if cert.L_squared != a.spec.L_squared or cert.window < 3 * a.spec.K:
        raise CertificateError("certificate does not cover the datum's window")


# ---- direct summation ------------------------------------------------------

def g_sigma_direct(a, ot, cert, chunk=2_000_000):
    """G_A^sigma(a) by summing over every leaf configuration of the support."""
    _require_cert(a, cert)
    spec = a.spec
    L = spec.L
    N = n_nodes(ot.tree)
    if N == 0:
        return a
    S = np.array(_support(a), dtype=np.int64)
    nl = n_leaves(ot.tree)
    slices = leaf_slices(ot.tree)
    total = len(S) ** nl
    K = spec.K
    acc = np.zeros(2 * K * nl + 1, dtype=np.complex128)
    offset = K * nl
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        digits = np.empty((len(idx), nl), dtype=np.int64)
        rem = idx.copy()
        for j in range(nl - 1, -1, -1):
            digits[:, j] = rem % len(S)
            rem //= len(S)
        leaves = S[digits]
        csum = np.concatenate([np.zeros((len(idx), 1), dtype=np.int64), np.cumsum(leaves, axis=1)], axis=1)

        def sums(m):
            s, cnt, nleft = slices[m]
            kl = csum[:, s + nleft] - csum[:, s]
            kr = csum[:, s + cnt] - csum[:, s + nleft]
            return kl + kr, kl, kr

        val = np.prod(_amp_lookup(a, leaves), axis=1)
        for j in range(N // 2):
            c, p = ot.sigma[2 * j], ot.sigma[2 * j + 1]
            kp, pl, pr = sums(p)
            kc, c2, c3 = sums(c)
            sib = pr if c[-1] == 1 else pl
            trivial = ((c2 == kp) & (c3 == -sib)) | ((c3 == kp) & (c2 == -sib))
            ok = trivial & (kc != 0) & (kp != 0)
            xp, xc = kp / L, kc / L
            d_c = omega(xc) - omega(c2 / L) - omega(c3 / L)
            safe = np.where(ok, d_c, 1.0)
            val = val * np.where(ok, omega(xp) * omega(xc) / (1j * safe), 0.0)
        ktot = csum[:, -1]
        acc += np.bincount(ktot + offset, weights=val.real, minlength=acc.size)
        acc += 1j * np.bincount(ktot + offset, weights=val.imag, minlength=acc.size)
    norm = (2 * math.pi * L) ** (-(N // 2))
    amps = acc[offset + 1:offset + K + 1] * norm
    return SpectralField(spec, amps)


# ---- K recursion -------------------------------------------------------------

def k_operator(u, v, w, support, spec):
    """K(u, v, w) on the trivially paired configurations of a support.

    u, v, w map signed indices to amplitudes; returns the same kind of map.
    """
    L = spec.L
    S = np.array(support, dtype=np.int64)
    k1, k2, k3 = np.meshgrid(S, S, S, indexing="ij")
    k1, k2, k3 = k1.ravel(), k2.ravel(), k3.ravel()
    m = k2 + k3
    k = k1 + m
    trivial = ((k2 == k) & (k3 == -k1)) | ((k3 == k) & (k2 == -k1))
    ok = trivial & (m != 0) & (k != 0)
    k1, k2, k3, m, k = k1[ok], k2[ok], k3[ok], m[ok], k[ok]
    xi, x1, xm = k / L, k1 / L, m / L
    kern = omega(xi) * omega(xm) / (omega(xi) - omega(x1) - omega(xm))
    vals = kern * np.array([u[j] for j in k1]) * np.array([v[j] for j in k2]) * np.array([w[j] for j in k3])
    out = {j: 0j for j in support}
    for kk, val in zip(k, vals):
        out[int(kk)] = out.get(int(kk), 0j) + val
    c = 1.0 / (2 * math.pi * L)
    return {j: c * val for j, val in out.items()}


def g_sigma_recursive(a, ot, cert):
    """G_A^sigma(a) through G = i K(G_1, G_2, G_3)."""
    _require_cert(a, cert)
    S = _support(a)
    base = {k: complex(a[k]) for k in S}

    def rec(tree, sigma):
        if tree is None:
            return base
        side, p1, p2, p3 = decompose(tree, sigma)
        g1, g2, g3 = (rec(t, s) for t, s, _ in (p1, p2, p3))
        kk = k_operator(g1, g2, g3, S, a.spec)
        return {k: 1j * val for k, val in kk.items()}

    g = rec(ot.tree, ot.sigma)
    amps = np.zeros(a.spec.K, dtype=np.complex128)
    for k, val in g.items():
        if k > 0:
            amps[k - 1] = val
    return SpectralField(a.spec, amps)


def g_sigma(a, ot, cert, method="recursive"):
    if method == "direct":
        return g_sigma_direct(a, ot, cert)
    if method == "recursive":
        return g_sigma_recursive(a, ot, cert)
    raise ValueError(f"unknown method {method!r}")


# ---- real symbols ------------------------------------------------------------

def f_pair(eta, xi):
    """F(eta, xi) = omega(xi) omega(xi - eta) / Delta^xi_{eta, xi - eta}
    = -1 / (omega(eta) (3 + (xi^2 + eta^2 + (xi - eta)^2) / 2))."""
    return -1.0 / (omega(eta) * (3.0 + 0.5 * (xi * xi + eta * eta + (xi - eta) ** 2)))


class SymbolTable:
    """Memoized U_A^sigma(a, xi) for one datum."""

    def __init__(self, a, mode="paired", cert=None):
        if mode not in ("paired", "exact"):
            raise ValueError(f"unknown mode {mode!r}")
        if cert is not None:
            _require_cert(a, cert)
        self.a = a
        self.mode = mode
        self.L = a.spec.L
        self.S = _support(a)
        self.w = {k: abs(a[k]) ** 2 for k in self.S}
        self.cache = {}

    def __call__(self, tree, sigma, k):
        key = (tree, sigma, k)
        if key in self.cache:
            return self.cache[key]
        if tree is None:
            val = 1.0
        else:
            val = self._rec(tree, sigma, k)
        self.cache[key] = val
        return val

    def _rec(self, tree, sigma, k):
        side, (t1, s1, _), (t2, s2, _), (t3, s3, _) = decompose(tree, sigma)
        L = self.L
        xi = k / L
        U2k, U3k = self(t2, s2, k), self(t3, s3, k)
        tot = 0.0
        for e in self.S:
            if self.mode == "exact" and e == k:
                continue
            term = self(t1, s1, e) * (U2k * self(t3, s3, -e) + self(t2, s2, -e) * U3k)
            tot += f_pair(e / L, xi) * term * self.w[e]
        if self.mode == "exact" and -k in self.w:
            tot -= f_pair(-xi, xi) * self(t1, s1, -k) * U2k * U3k * self.w[-k]
        return -tot / (2 * math.pi * L)


def u_sigma(a, ot, k, mode="paired", table=None):
    """U_A^sigma(a, k/L)."""
    table = table or SymbolTable(a, mode)
    return table(ot.tree, ot.sigma, int(k))


def comb_identity_check(a, n, k, mode="paired", trees=None):
    """(sum over the paired set of U_A^sigma(a, xi), U(a, xi)^n)."""
    from ..phase_theory import u_of
    from .trees import paired_trees
    if n > 3:
        raise ValueError("comb identity check supports n <= 3")
    table = SymbolTable(a, mode)
    trees = paired_trees(n) if trees is None else trees
    lhs = math.fsum(table(ot.tree, ot.sigma, int(k)) for ot in trees)
    return lhs, u_of(a, k) ** n
