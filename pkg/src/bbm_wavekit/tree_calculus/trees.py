"""Binary trees, node labels, parenthood order and admissible total orders.

A tree is ``None`` (the leaf) or a pair ``(left, right)``.  A node label is
the path from the root as a tuple over {1, 2}; the root is ``()`` and is
printed as ``0``, so ``(1, 2)`` prints as ``(1,2,0)``.

m <=_A j  iff  j is an ancestor of m or m itself (j is a prefix of m).
An admissible order sigma lists the node labels by time: sigma[0] is the
earliest interaction, sigma[-1] is always the root.
"""
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from itertools import combinations
import math

from .expoly import ExpPoly

LEAF = None
MAX_TREE_NODES = 8
MAX_ORDER_NODES = 10


def n_nodes(A):
    return 0 if A is None else 1 + n_nodes(A[0]) + n_nodes(A[1])


def n_leaves(A):
    return n_nodes(A) + 1


@lru_cache(maxsize=None)
def _trees(n):
    if n == 0:
        return (None,)
    out = []
    for n1 in range(n):
        for A1 in _trees(n1):
            for A2 in _trees(n - 1 - n1):
                out.append((A1, A2))
    return tuple(out)


def enumerate_trees(n):
    if not 0 <= n <= MAX_TREE_NODES:
        raise ValueError(f"tree enumeration is capped at {MAX_TREE_NODES} nodes")
    return list(_trees(n))


def chain(n, side=2):
    """Comb of n nodes whose internal nodes always hang on ``side``."""
    A = None
    for _ in range(n):
        A = (None, A) if side == 2 else (A, None)
    return A


def labels(A):
    if A is None:
        return []
    return [()] + [(1,) + m for m in labels(A[0])] + [(2,) + m for m in labels(A[1])]


def subtree(A, m):
    for step in m:
        A = A[step - 1]
    return A


def leq(m, j):
    """m <=_A j."""
    return len(j) <= len(m) and m[:len(j)] == j


def fmt_label(m):
    return "0" if not m else "(" + ",".join(str(x) for x in m) + ",0)"


def _shuffles(a, b):
    n = len(a) + len(b)
    for pos in combinations(range(n), len(a)):
        out, ia, ib = [], 0, 0
        pos = set(pos)
        for i in range(n):
            if i in pos:
                out.append(a[ia])
                ia += 1
            else:
                out.append(b[ib])
                ib += 1
        yield tuple(out)


@lru_cache(maxsize=None)
def _orders(A):
    if A is None:
        return ((),)
    left = [tuple((1,) + m for m in s) for s in _orders(A[0])]
    right = [tuple((2,) + m for m in s) for s in _orders(A[1])]
    out = []
    for s1 in left:
        for s2 in right:
            for s in _shuffles(s1, s2):
                out.append(s + ((),))
    return tuple(out)


def admissible_orders(A):
    """All total orders on N(A) extending <=_A (children before parents)."""
    if n_nodes(A) > MAX_ORDER_NODES:
        raise ValueError(f"order enumeration is capped at {MAX_ORDER_NODES} nodes")
    return list(_orders(A))


def is_admissible(A, sigma):
    if sorted(sigma) != sorted(labels(A)):
        return False
    pos = {m: i for i, m in enumerate(sigma)}
    return all(pos[m] <= pos[j] for m in sigma for j in sigma if leq(m, j))


def pairing_ok(sigma):
    """sigma(2j-1) <=_A sigma(2j) for every j (1-based positions)."""
    if len(sigma) % 2:
        return False
    return all(leq(sigma[2 * j], sigma[2 * j + 1]) for j in range(len(sigma) // 2))


@dataclass(frozen=True)
class OrderedTree:
    tree: object
    sigma: tuple

    @property
    def pairing_ok(self):
        return pairing_ok(self.sigma)

    @property
    def n(self):
        return n_nodes(self.tree)

    def describe(self):
        return " < ".join(fmt_label(m) for m in self.sigma)


def paired_trees(n):
    """The set of (A, sigma), A with 2n nodes, sigma admissible and paired."""
    if not 0 <= n <= 4:
        raise ValueError("paired-tree enumeration is capped at n = 4")
    out = []
    for A in enumerate_trees(2 * n):
        for s in admissible_orders(A):
            if pairing_ok(s):
                out.append(OrderedTree(A, s))
    return out


# ---- frequencies -------------------------------------------------------

def leaf_slices(A, start=0):
    """Map label -> (first leaf, leaf count) for every node of A."""
    out = {}

    def walk(B, m, s):
        if B is None:
            return 1
        nl = walk(B[0], m + (1,), s)
        nr = walk(B[1], m + (2,), s + nl)
        out[m] = (s, nl + nr, nl)
        return nl + nr

    walk(A, (), start)
    return out


def node_modes(A, kvec):
    """label -> (k_total, k_left, k_right) integer mode sums at each node."""
    if len(kvec) != n_leaves(A):
        raise ValueError(f"tree with {n_nodes(A)} nodes needs {n_leaves(A)} leaf modes")
    out = {}
    for m, (s, cnt, nl) in leaf_slices(A).items():
        kl = sum(kvec[s:s + nl])
        kr = sum(kvec[s + nl:s + cnt])
        out[m] = (kl + kr, kl, kr)
    return out


def r_exact(k, L2):
    """omega(k/L) / L as an exact rational: k / (L^2 + k^2)."""
    return Fraction(k) / (L2 + k * k)


@dataclass(frozen=True)
class NodeData:
    """Exact node frequencies: omega = L * w, Delta = L * d with w, d rational."""
    label: tuple
    k: int
    k_left: int
    k_right: int
    w: Fraction
    d: Fraction


def node_data(A, kvec, L2):
    out = {}
    for m, (k, kl, kr) in node_modes(A, kvec).items():
        w = r_exact(k, L2)
        d = w - r_exact(kl, L2) - r_exact(kr, L2)
        out[m] = NodeData(m, k, kl, kr, w, d)
    return out


def _degenerate(nodes, kvec):
    return any(k == 0 for k in kvec) or any(nd.k == 0 for nd in nodes.values())


def f_sigma_exact(A, sigma, kvec, spec):
    """F_A^sigma(t, xi) as an ExpPoly (zero when some node carries frequency 0)."""
    L = spec.L
    nodes = node_data(A, kvec, spec.L_squared)
    if _degenerate(nodes, kvec):
        return ExpPoly(L)
    F = ExpPoly.constant(L)
    for m in sigma:
        nd = nodes[m]
        F = (F.shift(nd.d) * (L * float(nd.w))).integrate()
    return F


def f_tree_total(A, kvec, spec):
    """F_A by its defining recursion over subtrees."""
    L = spec.L
    if any(k == 0 for k in kvec):
        return ExpPoly(L)

    def rec(B, ks):
        if B is None:
            return ExpPoly.constant(L)
        nl = n_leaves(B[0])
        F1 = rec(B[0], ks[:nl])
        F2 = rec(B[1], ks[nl:])
        k, kl, kr = sum(ks), sum(ks[:nl]), sum(ks[nl:])
        if k == 0:
            return ExpPoly(L)
        w = r_exact(k, spec.L_squared)
        d = w - r_exact(kl, spec.L_squared) - r_exact(kr, spec.L_squared)
        return ((F1 * F2).shift(d) * (L * float(w))).integrate()

    return rec(A, list(kvec))


def f_tree_by_orders(A, kvec, spec):
    total = ExpPoly(spec.L)
    for s in admissible_orders(A):
        total = total + f_sigma_exact(A, s, kvec, spec)
    return total


def leading_coefficient(A, sigma, kvec, spec):
    """prod_m omega_{2m} omega_{2m-1} / (i Delta_{2m-1}) delta(Delta_{2m-1} + Delta_{2m}).

    The Kronecker delta is decided on exact rationals.
    """
    if len(sigma) % 2:
        raise ValueError("the leading term needs an even number of nodes")
    L = spec.L
    nodes = node_data(A, kvec, spec.L_squared)
    if _degenerate(nodes, kvec):
        return 0j
    val = 1.0 + 0j
    for j in range(len(sigma) // 2):
        a, b = nodes[sigma[2 * j]], nodes[sigma[2 * j + 1]]
        if a.d + b.d != 0:
            return 0j
        val *= (L * float(b.w)) * (L * float(a.w)) / (1j * L * float(a.d))
    return val


def f_sigma_leading(A, sigma, kvec, spec, t):
    n = len(sigma) // 2
    return leading_coefficient(A, sigma, kvec, spec) * t ** n / math.factorial(n)


def _swap(sigma, j):
    s = list(sigma)
    s[2 * j], s[2 * j + 1] = s[2 * j + 1], s[2 * j]
    return tuple(s)


def cancellation_partner(sigma):
    """sigma composed with the transposition (2j-1, 2j) at the first unpaired j."""
    for j in range(len(sigma) // 2):
        a, b = sigma[2 * j], sigma[2 * j + 1]
        if not leq(a, b):
            # an admissible order never puts an ancestor first, so a, b are incomparable
            return _swap(sigma, j)
    return None


def unpaired_terms(n, kvec, spec, t):
    """[(A, sigma, partner, F~^sigma, F~^partner)] over sigma in S_A minus the paired set."""
    out = []
    for A in enumerate_trees(2 * n):
        orders = set(admissible_orders(A))
        for s in admissible_orders(A):
            if pairing_ok(s):
                continue
            p = cancellation_partner(s)
            assert p in orders and not pairing_ok(p)
            out.append((A, s, p, f_sigma_leading(A, s, kvec, spec, t),
                        f_sigma_leading(A, p, kvec, spec, t)))
    return out


def first_cancellation_check(n, kvec, spec, t):
    """Total leading-term contribution of the unpaired (A, sigma); vanishes."""
    if not 1 <= n <= 2:
        raise ValueError("first cancellation check supports n in {1, 2}")
    return sum((term[3] for term in unpaired_terms(n, kvec, spec, t)), 0j)


def count_orders(n):
    return sum(len(admissible_orders(A)) for A in enumerate_trees(n))


def multinomial_check(n):
    return count_orders(n) == math.factorial(n)
