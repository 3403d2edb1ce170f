"""Self-similar action on the 4-ary tree and finite-level pencil spectra.

The group acts on the binary tree through the automaton  a = sigma,
t = (a, t)  (dihedral factor) and on a second binary tree through
tau = sigma  (order-two factor).  The product action lives on the 4-ary
tree with letters encoding pairs: letter = x + 2*y for x, y in {0, 1}
(x the dihedral coordinate, fastest index).  Lifted through that encoding
the generators become

    a   -> permutation (0 1)(2 3), trivial restrictions
    t   -> trivial permutation,    restrictions (a, t, a, t)
    tau -> permutation (0 2)(1 3), trivial restrictions

with the left-action law g(x w) = g(x) . g|_x(w).  An alternative
tau = sigma(tau, tau) automaton generates the same group and is available
behind ``tau_with_restrictions=True`` for A/B checks.

Level-n matrices are the 4^n-point permutation representations; the
finite-level pencil  z1*M(a) + z2*M(t) + z3*M(tau)  is real symmetric and
its eigenvalues all satisfy the closed-form spectrum membership of the
full pencil (-lambda, z1, z2, z3) - a desk-scale witness that the tree
(Koopman) representation and the left regular representation have the
same joint spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .errors import LevelTooLarge
from .group import GEN_A, GEN_T, GEN_TAU, IDENTITY, GroupElement, mul
from .spectrum import MembershipResult, PencilPoint, membership

MAX_LEVEL = 6

_IDENT_PERM = (0, 1, 2, 3)


@dataclass(frozen=True)
class WreathElement:
    """Tree automorphism as (letter permutation, four restrictions)."""

    perm: Tuple[int, int, int, int]
    restrictions: Tuple[GroupElement, GroupElement, GroupElement, GroupElement]

    def is_identity(self) -> bool:
        return self.perm == _IDENT_PERM and all(
            r.is_identity() for r in self.restrictions
        )


_E4 = (IDENTITY, IDENTITY, IDENTITY, IDENTITY)

_WREATH_A = WreathElement((1, 0, 3, 2), _E4)
_WREATH_T = WreathElement(_IDENT_PERM, (GEN_A, GEN_T, GEN_A, GEN_T))
_WREATH_TAU = WreathElement((2, 3, 0, 1), _E4)
_WREATH_TAU_ALT = WreathElement((2, 3, 0, 1), (GEN_TAU,) * 4)
_WREATH_ID = WreathElement(_IDENT_PERM, _E4)


def generator_wreath(symbol: str, tau_with_restrictions: bool = False) -> WreathElement:
    """Wreath recursion of a generator (letters 0..3)."""
    if symbol == "a":
        return _WREATH_A
    if symbol == "t":
        return _WREATH_T
    if symbol == "tau":
        return _WREATH_TAU_ALT if tau_with_restrictions else _WREATH_TAU
    raise ValueError(f"unknown generator {symbol!r}")


def wreath_mul(g: WreathElement, h: WreathElement) -> WreathElement:
    """Product under the left action: (gh)|_x = g|_{h(x)} . h|_x."""
    perm = tuple(g.perm[h.perm[x]] for x in range(4))
    restr = tuple(mul(g.restrictions[h.perm[x]], h.restrictions[x]) for x in range(4))
    return WreathElement(perm, restr)


class TreeAction:
    """Wreath decompositions for arbitrary group elements, memoized."""

    def __init__(self, tau_with_restrictions: bool = False):
        self._gen = {
            s: generator_wreath(s, tau_with_restrictions) for s in ("a", "t", "tau")
        }
        self._cache: Dict[GroupElement, WreathElement] = {}
        self._levels: Dict[Tuple[GroupElement, int], np.ndarray] = {}

    def _wreath_pow_u(self, k: int) -> WreathElement:
        # square-and-multiply on u = a*t (u^-1 = t*a); powers of u commute,
        # and restriction exponents halve per level, so the cache stays small
        if k >= 0:
            base = wreath_mul(self._gen["a"], self._gen["t"])
        else:
            base = wreath_mul(self._gen["t"], self._gen["a"])
            k = -k
        acc = _WREATH_ID
        while k:
            if k & 1:
                acc = wreath_mul(acc, base)
            base = wreath_mul(base, base)
            k >>= 1
        return acc

    def wreath_of(self, g: GroupElement) -> WreathElement:
        """Wreath decomposition of a normal form tau^eps t^delta u^k."""
        cached = self._cache.get(g)
        if cached is not None:
            return cached
        wr = _WREATH_ID
        if g.tau_flag:
            wr = self._gen["tau"]
        if g.t_flag:
            wr = wreath_mul(wr, self._gen["t"])
        if g.k:
            wr = wreath_mul(wr, self._wreath_pow_u(g.k))
        self._cache[g] = wr
        return wr

    def act(self, g: GroupElement, word: Sequence[int]) -> Tuple[int, ...]:
        """Apply the action letter by letter: g(x w) = g(x) . g|_x(w)."""
        out = []
        for x in word:
            wr = self.wreath_of(g)
            out.append(wr.perm[x])
            g = wr.restrictions[x]
        return tuple(out)

    def level_matrix(self, g: GroupElement, n: int) -> np.ndarray:
        """Permutation vector of g on the 4^n level-n words.

        Index encoding is big-endian in the letters: word (x_1 .. x_n)
        maps to x_1*4^(n-1) + ... + x_n.
        """
        if n < 0:
            raise ValueError("level must be nonnegative")
        key = (g, n)
        cached = self._levels.get(key)
        if cached is not None:
            return cached
        if n == 0:
            vec = np.zeros(1, dtype=np.int64)
        else:
            wr = self.wreath_of(g)
            block = 4 ** (n - 1)
            vec = np.empty(4**n, dtype=np.int64)
            for x in range(4):
                sub = self.level_matrix(wr.restrictions[x], n - 1)
                vec[x * block : (x + 1) * block] = wr.perm[x] * block + sub
        self._levels[key] = vec
        return vec


_DEFAULT_ACTION = TreeAction()
_ALT_ACTION = TreeAction(tau_with_restrictions=True)


def _action(tau_with_restrictions: bool = False) -> TreeAction:
    return _ALT_ACTION if tau_with_restrictions else _DEFAULT_ACTION


def act_on_word(
    g: GroupElement, word: Sequence[int] | str, tau_with_restrictions: bool = False
) -> Tuple[int, ...]:
    """Self-similar action on a word over letters 0..3.

    Accepts digit strings for convenience ("132" -> (1, 3, 2))."""
    if isinstance(word, str):
        word = tuple(int(ch) for ch in word if not ch.isspace())
    letters = tuple(int(x) for x in word)
    if any(x < 0 or x > 3 for x in letters):
        raise ValueError("letters must be in 0..3")
    return _action(tau_with_restrictions).act(g, letters)


@dataclass(frozen=True)
class LevelMatrix:
    """Sparse level-n permutation: image vector over 0..4^n-1."""

    n: int
    perm_vector: np.ndarray

    def matrix(self) -> np.ndarray:
        size = len(self.perm_vector)
        m = np.zeros((size, size))
        m[self.perm_vector, np.arange(size)] = 1.0
        return m

    def dump_lines(self) -> Iterable[str]:
        for i, image in enumerate(self.perm_vector):
            yield f"{i} -> {int(image)}"


def level_matrix(
    g: GroupElement, n: int, tau_with_restrictions: bool = False
) -> LevelMatrix:
    vec = _action(tau_with_restrictions).level_matrix(g, n)
    return LevelMatrix(n=n, perm_vector=vec)


def pencil_level_matrix(
    z1: float, z2: float, z3: float, n: int, tau_with_restrictions: bool = False
) -> np.ndarray:
    """Dense symmetric matrix z1*M(a) + z2*M(t) + z3*M(tau) at level n."""
    if n > MAX_LEVEL:
        raise LevelTooLarge(f"level {n} exceeds the desk-scale cap {MAX_LEVEL}")
    act = _action(tau_with_restrictions)
    size = 4**n
    M = np.zeros((size, size))
    cols = np.arange(size)
    for coeff, gen in ((z1, GEN_A), (z2, GEN_T), (z3, GEN_TAU)):
        M[act.level_matrix(gen, n), cols] += coeff
    return M


def pencil_level_eigs(
    z1: float, z2: float, z3: float, n: int, tau_with_restrictions: bool = False
) -> np.ndarray:
    """Sorted eigenvalues (with multiplicity) of the level-n pencil."""
    M = pencil_level_matrix(z1, z2, z3, n, tau_with_restrictions)
    return np.linalg.eigvalsh(M)


def validate_eigs_in_spectrum(
    z1: float,
    z2: float,
    z3: float,
    n: int,
    tol: float = 1e-8,
    tau_with_restrictions: bool = False,
) -> dict:
    """Check every level-n eigenvalue against the closed-form spectrum.

    For each eigenvalue lambda, (-lambda, z1, z2, z3) must be a spectrum
    point; violations are collected, and the largest membership margin
    among all eigenvalues is reported as a quality figure.
    """
    eigs = pencil_level_eigs(z1, z2, z3, n, tau_with_restrictions)
    violations: List[dict] = []
    max_margin = 0.0
    for lam in eigs:
        res: MembershipResult = membership(
            PencilPoint(-lam, z1, z2, z3), tol=tol
        )
        max_margin = max(max_margin, res.margin)
        if not res.in_spectrum:
            violations.append({"eigenvalue": float(lam), "margin": res.margin})
    return {"violations": violations, "max_margin": max_margin}


def spectrum_slice_intervals(z1: float, z2: float, z3: float):
    """The real spectrum slice {z0 : (-z0, z1, z2, z3) in P} as intervals.

    The slice is the union of +-z3 +- [r_lo, r_hi] with
    r = sqrt(z1^2 + z2^2 + 2*z1*z2*x) over x in [-1, 1].
    """
    r_lo = abs(abs(z1) - abs(z2))
    r_hi = abs(z1) + abs(z2)
    raw = []
    for s3 in (+1.0, -1.0):
        for sr in (+1.0, -1.0):
            lo = s3 * z3 + sr * r_lo
            hi = s3 * z3 + sr * r_hi
            raw.append((min(lo, hi), max(lo, hi)))
    raw.sort()
    merged = [raw[0]]
    for lo, hi in raw[1:]:
        if lo <= merged[-1][1] + 1e-15:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def coverage_gap(
    z1: float, z2: float, z3: float, n: int, tau_with_restrictions: bool = False
) -> float:
    """One-sided Hausdorff gap from the spectrum slice to the level-n
    eigenvalues: sup over slice points of the distance to the nearest
    eigenvalue."""
    eigs = np.sort(pencil_level_eigs(z1, z2, z3, n, tau_with_restrictions))
    intervals = spectrum_slice_intervals(z1, z2, z3)

    def dist(y: float) -> float:
        i = np.searchsorted(eigs, y)
        best = np.inf
        if i < len(eigs):
            best = min(best, abs(eigs[i] - y))
        if i > 0:
            best = min(best, abs(y - eigs[i - 1]))
        return float(best)

    gap = 0.0
    for lo, hi in intervals:
        # the distance-to-eigenvalues function is piecewise V-shaped, so
        # its max over [lo, hi] sits at an endpoint or at a midpoint of
        # consecutive eigenvalues inside the interval
        candidates = [lo, hi]
        inside = eigs[(eigs > lo) & (eigs < hi)]
        if len(inside) > 1:
            candidates.extend(0.5 * (inside[1:] + inside[:-1]))
        for y in candidates:
            gap = max(gap, dist(float(y)))
    return gap


def eigenvalue_csv_lines(
    z1: float, z2: float, z3: float, n: int, cluster_tol: float = 1e-9
) -> Iterable[str]:
    """CSV rows ``level,z1,z2,z3,lambda,multiplicity_hint``."""
    eigs = pencil_level_eigs(z1, z2, z3, n)
    yield "level,z1,z2,z3,lambda,multiplicity_hint"
    i = 0
    while i < len(eigs):
        j = i
        while j + 1 < len(eigs) and eigs[j + 1] - eigs[i] <= cluster_tol:
            j += 1
        yield f"{n},{z1!r},{z2!r},{z3!r},{float(eigs[i])!r},{j - i + 1}"
        i = j + 1
