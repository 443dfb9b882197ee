"""The character-twisted complex ``(E (x) wedge^p L, d(f))`` and its homology.

Chain space ``C_p`` has basis ``v_e (x) x_I`` for ``I`` a sorted p-subset of
``range(n)`` (0-based), ranked in colex order by the combinatorial number
system; the E-index varies fastest, so the degree-1 differential is the
block row ``[X_1 - f_1 | ... | X_n - f_n]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from . import linalg_core as la
from .errors import ComplexNotChain, DegreeOutOfRange, NotCommuting
from .lie_structure import (
    Character,
    LieAlgebraRep,
    OperatorFamily,
    abelian_rep,
    make_character,
    with_sign,
)
from .linalg_core import EXACT, RankPolicy

#: ``d_{p-1} d_p`` counts as zero below this times ``1 + |d_{p-1}| |d_p|``.
CHAIN_TOL = 1e-10
#: Commutators count as zero below this times ``|A| |B|`` (max-entry norms).
COMMUTING_TOL = 1e-10


# --- exterior algebra basis ----------------------------------------------------


def rank_multi_index(idx: tuple[int, ...]) -> int:
    """Colex rank of a strictly increasing 0-based index tuple."""
    return sum(comb(c, k + 1) for k, c in enumerate(idx))


def unrank_multi_index(r: int, p: int) -> tuple[int, ...]:
    out = []
    for k in range(p, 0, -1):
        c = k - 1
        while comb(c + 1, k) <= r:
            c += 1
        out.append(c)
        r -= comb(c, k)
    return tuple(reversed(out))


@lru_cache(maxsize=None)
def multi_indices(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    """All p-subsets of ``range(n)`` in rank order."""
    if p < 0 or p > n:
        return ()
    return tuple(unrank_multi_index(r, p) for r in range(comb(n, p)))


def chain_dim(m: int, n: int, p: int) -> int:
    return m * comb(n, p) if 0 <= p <= n else 0


def wedge_insert(j: int, idx: tuple[int, ...]):
    """Normalize ``e_j ^ e_idx``.

    Returns ``(sign, sorted_idx)``, or ``None`` when ``j`` already occurs.
    """
    if j in idx:
        return None
    shift = sum(1 for i in idx if i < j)
    sign = -1 if shift % 2 else 1
    return sign, tuple(sorted(idx + (j,)))


# --- differentials -------------------------------------------------------------


def _check_degree(L: LieAlgebraRep, p: int):
    if not 1 <= p <= L.n:
        raise DegreeOutOfRange(f"degree {p} outside 1..{L.n}")


def _differential(L: LieAlgebraRep, fc: np.ndarray, p: int) -> np.ndarray:
    m, n, backend = L.dim_E, L.n, L.backend
    c = L.structure_constants
    I = la.identity(m, backend)
    shifted = [L.ops[i] - I * fc[i] for i in range(n)]
    D = la.zeros((chain_dim(m, n, p - 1), chain_dim(m, n, p)), backend)
    for col, idx in enumerate(multi_indices(n, p)):
        cs = slice(col * m, (col + 1) * m)
        # action term: sum_k (-1)^k (X_{i_k} - f(x_{i_k})) (x) (idx without k)
        for k in range(p):
            row = rank_multi_index(idx[:k] + idx[k + 1 :])
            rs = slice(row * m, (row + 1) * m)
            D[rs, cs] = D[rs, cs] + (shifted[idx[k]] if k % 2 == 0 else -shifted[idx[k]])
        # bracket term: sum_{k<l} (-1)^{k+l} [x_{i_k}, x_{i_l}] ^ (idx without k, l)
        for k in range(p):
            for l in range(k + 1, p):
                rest = idx[:k] + idx[k + 1 : l] + idx[l + 1 :]
                sign = -1 if (k + l) % 2 else 1
                for t in range(n):
                    coef = c[idx[k], idx[l], t]
                    if not coef:
                        continue
                    ins = wedge_insert(t, rest)
                    if ins is None:
                        continue
                    s, target = ins
                    rs = slice(rank_multi_index(target) * m, (rank_multi_index(target) + 1) * m)
                    D[rs, cs] = D[rs, cs] + I * (coef * (sign * s))
    return D


def differential_matrix(L: LieAlgebraRep, f, p: int, policy: RankPolicy | None = None) -> np.ndarray:
    """Matrix of ``d_{p-1}(f): C_p -> C_{p-1}``, shape ``m C(n,p-1) x m C(n,p)``.

    Raises NotACharacter unless ``f`` vanishes on ``L^2``.
    """
    _check_degree(L, p)
    ch = make_character(L, f.coords if isinstance(f, Character) else f)
    return _differential(L, ch.as_array(L.backend), p)


@dataclass(frozen=True)
class ChainComplexInstance:
    """Differentials ``d[p-1]`` mapping ``C_p -> C_{p-1}`` for ``p = 1..n``."""

    rep: LieAlgebraRep
    character: Character
    differentials: tuple[np.ndarray, ...]
    policy: RankPolicy

    @property
    def n(self) -> int:
        return self.rep.n

    def dims(self) -> list[int]:
        return [chain_dim(self.rep.dim_E, self.rep.n, p) for p in range(self.rep.n + 1)]

    def chain_defect(self) -> float:
        """Largest ``max|d_{p-1} d_p|`` relative to ``1 + |d_{p-1}| |d_p|``."""
        worst = 0.0
        for p in range(1, len(self.differentials)):
            lo, hi = self.differentials[p - 1], self.differentials[p]
            prod = lo @ hi
            if self.rep.backend == EXACT:
                if not la.is_zero(prod):
                    return float("inf")
                continue
            worst = max(worst, la.max_abs(prod) / (1 + la.max_abs(lo) * la.max_abs(hi)))
        return worst


def _is_chain(C: ChainComplexInstance) -> bool:
    d = C.chain_defect()
    return d == 0.0 if C.rep.backend == EXACT else d <= CHAIN_TOL


def build_complex(L: LieAlgebraRep, f, policy: RankPolicy | None = None) -> ChainComplexInstance:
    """All differentials at ``f``, validated to square to zero."""
    policy = policy or RankPolicy(backend=L.backend)
    ch = make_character(L, f.coords if isinstance(f, Character) else f)
    fc = ch.as_array(L.backend)
    C = ChainComplexInstance(
        L, ch, tuple(_differential(L, fc, p) for p in range(1, L.n + 1)), policy
    )
    if not _is_chain(C):
        raise ComplexNotChain(
            f"d o d != 0 (defect {C.chain_defect():.3g}); wrong bracket sign or non-character"
        )
    return C


def calibrate_sign(L: LieAlgebraRep, policy: RankPolicy | None = None) -> LieAlgebraRep:
    """Pick the bracket sign for which the complex at ``f = 0`` is a chain."""
    policy = policy or RankPolicy(backend=L.backend)
    zero = [la.scalar(0, L.backend)] * L.n
    for sign in (1, -1):
        cand = with_sign(L, sign)
        try:
            build_complex(cand, zero, policy)
        except ComplexNotChain:
            continue
        return cand
    raise ComplexNotChain("neither bracket sign gives d o d = 0")


# --- homology ------------------------------------------------------------------


@dataclass(frozen=True)
class BettiVector:
    """Homology dimensions ``beta_0..beta_n``."""

    values: tuple[int, ...]
    ill_conditioned: bool = False
    ranks: tuple[int, ...] = field(default=(), compare=False)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, p):
        return self.values[p]

    def __len__(self):
        return len(self.values)

    def euler_characteristic(self) -> int:
        return sum((-1) ** p * b for p, b in enumerate(self.values))

    def is_zero(self) -> bool:
        return not any(self.values)


def betti(C: ChainComplexInstance, policy: RankPolicy | None = None) -> BettiVector:
    """``beta_p = dim C_p - rank d_{p-1} - rank d_p`` (outer maps are zero)."""
    policy = policy or C.policy
    n = C.n
    ranks = [0] * (n + 2)
    near = False
    for p in range(1, n + 1):
        ranks[p], flag = la.rank_details(C.differentials[p - 1], policy)
        near = near or flag
    dims = C.dims()
    values = tuple(max(0, dims[p] - ranks[p] - ranks[p + 1]) for p in range(n + 1))
    return BettiVector(values, near, tuple(ranks[1 : n + 1]))


def is_exact(C: ChainComplexInstance, policy: RankPolicy | None = None) -> bool:
    return betti(C, policy).is_zero()


# --- commuting tuples ----------------------------------------------------------


def check_commuting(family: OperatorFamily) -> None:
    ops = family.ops
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            K = la.commutator(ops[i], ops[j])
            if family.backend == EXACT:
                bad = not la.is_zero(K)
            else:
                bad = la.max_abs(K) > COMMUTING_TOL * max(la.max_abs(ops[i]) * la.max_abs(ops[j]), 1e-300)
            if bad:
                raise NotCommuting(f"{family.names[i]} and {family.names[j]} do not commute")


def koszul_complex(family: OperatorFamily, point, policy: RankPolicy | None = None) -> ChainComplexInstance:
    """Koszul complex of the commuting tuple shifted by ``point``."""
    check_commuting(family)
    return build_complex(abelian_rep(family), point, policy)
