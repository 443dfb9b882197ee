"""Matrix Lie algebras: structure constants, series, ideals, characters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg_core as la
from .errors import NotACharacter, NotClosed, NotIndependent, ShapeMismatch
from .linalg_core import DEFAULT_POLICY, EXACT, FLOAT, RankPolicy

#: Closure is declared when the bracket residual is below this times
#: ``|X_i|_F * |X_j|_F``.
CLOSURE_TOL = 1e-8
#: A functional counts as a character when ``|f([X_i, X_j])|`` is below this
#: times ``(1 + |f|_inf) * (1 + |c|_max)``.
CHARACTER_TOL = 1e-8


@dataclass(frozen=True)
class OperatorFamily:
    """An ordered list of m x m operators ``X_1..X_n`` on E = C^m."""

    ops: tuple[np.ndarray, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.ops:
            raise ShapeMismatch("an operator family needs at least one operator")
        m = self.ops[0].shape[0]
        backends = {la.backend_of(X) for X in self.ops}
        if len(backends) != 1:
            raise la.BackendMismatch("operators use mixed backends")
        for X in self.ops:
            if X.shape != (m, m):
                raise ShapeMismatch(f"operator shape {X.shape} differs from ({m}, {m})")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"X{i + 1}" for i in range(len(self.ops))))
        if len(self.names) != len(self.ops):
            raise ShapeMismatch("names and operators differ in length")

    @classmethod
    def from_matrices(cls, mats, names: Sequence[str] = (), backend: str | None = None):
        return cls(tuple(la.as_matrix(M, backend) for M in mats), tuple(names))

    @property
    def dim_E(self) -> int:
        return self.ops[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def backend(self) -> str:
        return la.backend_of(self.ops[0])

    def stacked(self) -> np.ndarray:
        """m^2 x n matrix whose columns are the flattened operators."""
        return np.stack([X.reshape(-1) for X in self.ops], axis=1)

    def combination(self, coeffs) -> np.ndarray:
        out = la.zeros(self.ops[0].shape, self.backend)
        for c, X in zip(coeffs, self.ops):
            out = out + X * c
        return out

    def to_backend(self, backend: str) -> "OperatorFamily":
        if backend == self.backend:
            return self
        conv = la.to_exact if backend == EXACT else la.to_float
        return OperatorFamily(tuple(conv(X) for X in self.ops), self.names)


@dataclass(frozen=True)
class LieAlgebraRep:
    """A matrix Lie algebra with its bracket convention.

    ``bracket(X_i, X_j) = sign * (X_i X_j - X_j X_i) = sum_k c[i, j, k] X_k``.
    """

    family: OperatorFamily
    sign: int
    structure_constants: np.ndarray
    closure_residual: float = 0.0

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def dim_E(self) -> int:
        return self.family.dim_E

    @property
    def ops(self) -> tuple[np.ndarray, ...]:
        return self.family.ops

    @property
    def backend(self) -> str:
        return self.family.backend

    def bracket_coords(self, x, y) -> np.ndarray:
        """Coordinates of ``bracket(x, y)`` for x, y given in coordinates."""
        c = self.structure_constants
        if self.backend == EXACT:
            out = la.zeros(self.n, EXACT)
            for i in range(self.n):
                if not x[i]:
                    continue
                for j in range(self.n):
                    if y[j]:
                        out = out + c[i, j] * (x[i] * y[j])
            return out
        return np.einsum("i,j,ijk->k", x, y, c)

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(f"{self.backend}|{self.sign}|{self.dim_E}|{self.n}".encode())
        for X in self.ops:
            h.update(",".join(str(x) for x in X.flat).encode())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class Character:
    """A functional on L given by its values on the basis.

    ``vanishes_on_derived`` certifies ``f(L^2) = 0`` at the character
    tolerance (exactly on the exact backend).
    """

    coords: tuple
    vanishes_on_derived: bool = True

    def __len__(self):
        return len(self.coords)

    def as_array(self, backend: str = FLOAT) -> np.ndarray:
        if backend == EXACT:
            return np.array([la.scalar(x, EXACT) for x in self.coords], dtype=object)
        return np.array([complex(x) for x in self.coords], dtype=complex)

    def sort_key(self):
        return tuple(
            x.sort_key() if isinstance(x, la.GaussianRational) else (x.real, x.imag)
            for x in self.coords
        )


@dataclass(frozen=True)
class SubalgebraSpec:
    """A subspace of L; rows of ``basis`` are coordinates in the X-basis."""

    basis: np.ndarray
    is_ideal: bool = False
    name: str = ""

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


# --- construction --------------------------------------------------------------


def _structure_constants(family: OperatorFamily, policy: RankPolicy):
    """Constants for ``sign = +1`` and the worst relative closure residual."""
    n, backend = family.n, family.backend
    V = family.stacked()
    if la.rank(V, policy) < n:
        raise NotIndependent("operators are linearly dependent")
    c = la.zeros((n, n, n), backend)
    worst = 0.0
    if backend == EXACT:
        # exact solve: append each bracket as an extra column and read the rref
        for i in range(n):
            for j in range(i + 1, n):
                B = la.commutator(family.ops[i], family.ops[j]).reshape(-1)
                R, pivots = la.rref(np.column_stack([V, B]))
                if n in pivots:
                    raise NotClosed(f"bracket of {family.names[i]} and {family.names[j]} leaves the span")
                sol = [R[r, n] for r in range(n)]
                c[i, j] = sol
                c[j, i] = [-x for x in sol]
        return c, 0.0
    pinv = np.linalg.pinv(V)
    norms = [np.linalg.norm(X) for X in family.ops]
    for i in range(n):
        for j in range(i + 1, n):
            B = la.commutator(family.ops[i], family.ops[j]).reshape(-1)
            sol = pinv @ B
            resid = np.linalg.norm(V @ sol - B) / max(norms[i] * norms[j], 1e-300)
            worst = max(worst, float(resid))
            if resid > CLOSURE_TOL:
                raise NotClosed(
                    f"bracket of {family.names[i]} and {family.names[j]} leaves the span "
                    f"(relative residual {resid:.3g})"
                )
            c[i, j] = sol
            c[j, i] = -sol
    # drop solver noise so exactly-zero brackets stay zero
    c[np.abs(c) <= 1e-13 * max(1.0, float(np.max(np.abs(c))))] = 0
    return c, worst


def build_rep(
    family: OperatorFamily, sign: int | None = None, policy: RankPolicy | None = None
) -> LieAlgebraRep:
    """Solve for structure constants and fix the bracket sign.

    With ``sign=None`` the sign is calibrated: +1 is tried first and kept if
    the twisted complex at the zero character squares to zero, otherwise -1.
    """
    policy = policy or RankPolicy(backend=family.backend)
    family = family.to_backend(policy.backend)
    c, resid = _structure_constants(family, policy)
    if sign is not None:
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        return LieAlgebraRep(family, sign, c if sign == 1 else -c, resid)
    from .homology_engine import calibrate_sign

    return calibrate_sign(LieAlgebraRep(family, 1, c, resid), policy)


def abelian_rep(family: OperatorFamily) -> LieAlgebraRep:
    """Rep with all structure constants zero; no closure or independence check."""
    n = family.n
    return LieAlgebraRep(family, 1, la.zeros((n, n, n), family.backend), 0.0)


def with_sign(L: LieAlgebraRep, sign: int) -> LieAlgebraRep:
    if sign == L.sign:
        return L
    return LieAlgebraRep(L.family, sign, -L.structure_constants, L.closure_residual)


def _policy_for(L: LieAlgebraRep, policy: RankPolicy | None) -> RankPolicy:
    return policy or RankPolicy(backend=L.backend)


# --- series --------------------------------------------------------------------


def bracket_scale(L: LieAlgebraRep) -> float:
    """Magnitude against which bracket coordinates count as zero."""
    if L.backend == EXACT:
        return 0.0
    return la.max_abs(L.structure_constants.reshape(1, -1))


def _span(rows: list, n: int, policy: RankPolicy, scale: float = 0.0) -> np.ndarray:
    if not rows:
        return la.zeros((0, n), policy.backend)
    M = np.array(rows, dtype=object if policy.backend == EXACT else complex)
    return la.row_basis(M, policy, scale)


def bracket_of_spaces(L: LieAlgebraRep, A: np.ndarray, B: np.ndarray, policy=None) -> np.ndarray:
    """Basis of ``span{bracket(a, b)}`` for rows a of A, b of B."""
    policy = _policy_for(L, policy)
    rows = [L.bracket_coords(a, b) for a in A for b in B]
    scale = bracket_scale(L) * la.max_abs(A) * la.max_abs(B) if rows else 0.0
    return _span(rows, L.n, policy, scale)


def _whole(L: LieAlgebraRep) -> np.ndarray:
    return la.identity(L.n, L.backend)


def derived_subalgebra(L: LieAlgebraRep, policy=None) -> SubalgebraSpec:
    policy = _policy_for(L, policy)
    c = L.structure_constants
    rows = [c[i, j] for i in range(L.n) for j in range(i + 1, L.n)]
    return SubalgebraSpec(_span(rows, L.n, policy, bracket_scale(L)), is_ideal=True, name="L^2")


def derived_series(L: LieAlgebraRep, policy=None) -> list[SubalgebraSpec]:
    """``L, [L,L], [[L,L],[L,L]], ...`` until it vanishes or stabilizes."""
    policy = _policy_for(L, policy)
    series = [SubalgebraSpec(_whole(L), True, "L")]
    while series[-1].dim:
        cur = series[-1].basis
        nxt = bracket_of_spaces(L, cur, cur, policy)
        if nxt.shape[0] == cur.shape[0]:
            break
        series.append(SubalgebraSpec(nxt, True, f"L^({len(series)})"))
    return series


def is_solvable(L: LieAlgebraRep, policy=None) -> bool:
    return derived_series(L, policy)[-1].dim == 0


def lower_central_series(L: LieAlgebraRep, policy=None) -> list[SubalgebraSpec]:
    """``L, [L,L], [L,[L,L]], ...`` until it vanishes or stabilizes."""
    policy = _policy_for(L, policy)
    whole = _whole(L)
    series = [SubalgebraSpec(whole, True, "L")]
    while series[-1].dim:
        cur = series[-1].basis
        nxt = bracket_of_spaces(L, whole, cur, policy)
        if nxt.shape[0] == cur.shape[0]:
            break
        series.append(SubalgebraSpec(nxt, True, f"C^{len(series) + 1}"))
    return series


def is_nilpotent(L: LieAlgebraRep, policy=None) -> bool:
    return lower_central_series(L, policy)[-1].dim == 0


# --- subspaces -----------------------------------------------------------------


def subspace(L: LieAlgebraRep, rows, policy=None, name: str = "") -> SubalgebraSpec:
    """Subspace spanned by coordinate rows, with its ideal flag computed."""
    policy = _policy_for(L, policy)
    basis = la.as_matrix(np.atleast_2d(np.array(rows, dtype=object if L.backend == EXACT else complex)), L.backend)
    if la.rank(basis, policy) != basis.shape[0]:
        raise NotIndependent("subspace rows are linearly dependent")
    S = SubalgebraSpec(basis, False, name)
    return SubalgebraSpec(basis, is_ideal(S, L, policy), name)


def is_ideal(S: SubalgebraSpec, L: LieAlgebraRep, policy=None) -> bool:
    policy = _policy_for(L, policy)
    if S.dim == 0:
        return True
    r = la.rank(S.basis, policy)
    scale = bracket_scale(L) * la.max_abs(S.basis)
    for x in _whole(L):
        for s in S.basis:
            v = L.bracket_coords(x, s)
            if la.rank(np.vstack([S.basis, v[None, :]]), policy, scale) != r:
                return False
    return True


def same_subspace(A: np.ndarray, B: np.ndarray, policy: RankPolicy) -> bool:
    ra, rb = la.rank(A, policy) if A.size else 0, la.rank(B, policy) if B.size else 0
    if ra != rb:
        return False
    if ra == 0:
        return True
    return la.rank(np.vstack([A, B]), policy) == ra


def subrep(L: LieAlgebraRep, S: SubalgebraSpec, policy=None) -> LieAlgebraRep:
    """The rep of the subalgebra S, with operators ``sum_j basis[r, j] X_j``."""
    policy = _policy_for(L, policy)
    ops = tuple(L.family.combination(row) for row in S.basis)
    names = tuple(f"{S.name or 'S'}{r + 1}" for r in range(S.dim))
    return build_rep(OperatorFamily(ops, names), L.sign, policy)


# --- adjoint / coadjoint -------------------------------------------------------


def adjoint_rep(L: LieAlgebraRep) -> OperatorFamily:
    """``ad X_i`` as n x n matrices: column j holds the coords of bracket(X_i, X_j)."""
    c = L.structure_constants
    ops = tuple(np.array(c[i].T) for i in range(L.n))
    return OperatorFamily(ops, tuple(f"ad {name}" for name in L.family.names))


def _coord_array(f, backend: str) -> np.ndarray:
    if isinstance(f, Character):
        return f.as_array(backend)
    if backend == EXACT:
        return np.array([la.scalar(x, EXACT) for x in f], dtype=object)
    return np.asarray([complex(x) for x in f], dtype=complex)


def coadjoint_form(L: LieAlgebraRep, f) -> np.ndarray:
    """Skew matrix ``B[i, j] = f(bracket(X_i, X_j))``."""
    fc = _coord_array(f, L.backend)
    c = L.structure_constants
    if L.backend == EXACT:
        B = la.zeros((L.n, L.n), EXACT)
        for i in range(L.n):
            for j in range(L.n):
                B[i, j] = sum((c[i, j, k] * fc[k] for k in range(L.n)), la.ZERO)
        return B
    return np.einsum("ijk,k->ij", c, fc)


def coadjoint_form_rank(f, L: LieAlgebraRep, policy=None) -> int:
    """Rank of ``f([., .])``; the dimension of the coadjoint orbit of f."""
    policy = _policy_for(L, policy)
    B = coadjoint_form(L, f)
    if policy.backend == FLOAT and la.max_abs(B) <= CHARACTER_TOL:
        return 0
    return la.rank(B, policy)


def character_defect(L: LieAlgebraRep, f) -> float:
    """``max |f(bracket(X_i, X_j))|``."""
    B = coadjoint_form(L, f)
    return la.max_abs(B)


def character_tolerance(L: LieAlgebraRep, f) -> float:
    fc = _coord_array(f, L.backend)
    return CHARACTER_TOL * (1 + la.max_abs(fc[None, :])) * (1 + la.max_abs(L.structure_constants.reshape(1, -1)))


def make_character(L: LieAlgebraRep, coords, *, require: bool = True) -> Character:
    """Wrap coordinates as a Character, certifying ``f(L^2) = 0``.

    Raises NotACharacter when the certificate fails and ``require`` is set.
    """
    if len(coords) != L.n:
        raise ShapeMismatch(f"functional has {len(coords)} coordinates, algebra has dimension {L.n}")
    fc = _coord_array(coords, L.backend)
    if L.backend == EXACT:
        ok = la.is_zero(coadjoint_form(L, fc))
    else:
        ok = character_defect(L, fc) <= character_tolerance(L, fc)
    if require and not ok:
        raise NotACharacter(f"functional does not vanish on L^2 (defect {character_defect(L, fc):.3g})")
    return Character(tuple(fc.tolist()), ok)


def restrict_functional(f, S: SubalgebraSpec) -> Character:
    """``f`` composed with the inclusion of S, in S's basis."""
    backend = la.backend_of(S.basis)
    fc = _coord_array(f, backend)
    vals = S.basis @ fc if S.dim else np.zeros(0)
    return Character(tuple(np.asarray(vals).tolist()), True)


def annihilator(S: SubalgebraSpec, policy: RankPolicy) -> np.ndarray:
    """Rows spanning ``{f : f(S) = 0}`` in dual coordinates."""
    n = S.basis.shape[1]
    if S.dim == 0:
        return la.identity(n, policy.backend)
    return la.null_space(S.basis, policy).T

