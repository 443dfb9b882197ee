"""Joint spectrum of a solvable matrix Lie algebra.

Candidates come from a simultaneous triangularization (Lie's theorem): the
diagonal weights on E, shifted by signed subset sums of the nonzero weights
of the adjoint representation. Each candidate is then decided by the
homology of the twisted complex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import linalg_core as la
from .errors import (
    CombinatorialBlowup,
    IncompleteCandidates,
    NotAnIdeal,
    NotSolvable,
    NumericalFailure,
    ShapeMismatch,
)
from .homology_engine import BettiVector, betti, build_complex, check_commuting
from .lie_structure import (
    Character,
    LieAlgebraRep,
    OperatorFamily,
    SubalgebraSpec,
    abelian_rep,
    adjoint_rep,
    derived_subalgebra,
    is_solvable,
    make_character,
    restrict_functional,
)
from .linalg_core import EXACT, FLOAT, GaussianRational, RankPolicy

#: Characters closer than this in the max-norm are the same point.
DEDUP_TOL = 1e-7
#: Largest candidate set enumerated before giving up.
CANDIDATE_CAP = 10**5
#: Relative size of the below-diagonal part tolerated in a triangularization.
TRIANGULAR_TOL = 1e-8


@dataclass(frozen=True)
class WeightList:
    """Weights of E in the order of a triangularizing flag.

    ``basis`` is the change of basis (unitary on the float backend) with
    ``basis^-1 X_i basis`` upper triangular; ``residual`` is the relative size
    of the largest below-diagonal entry.
    """

    weights: tuple[Character, ...]
    basis: np.ndarray
    residual: float = 0.0


@dataclass(frozen=True)
class CandidateSet:
    """Provenance entries are ``(weight index, shift signs)``, one sign in
    {-1, 0, 1} per nonzero adjoint weight."""

    characters: tuple[Character, ...]
    provenance: tuple[tuple, ...]
    warnings: tuple[str, ...] = ()
    adjoint_shifts: int = 0


@dataclass(frozen=True)
class SpectralVerdict:
    character: Character
    in_spectrum: bool
    betti: BettiVector


@dataclass
class SpectrumResult:
    """Points of ``Sp(L, E)`` with their Betti vectors."""

    entries: list[tuple[Character, BettiVector]]
    fingerprint: str
    policy: RankPolicy
    provenance: list[tuple] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    n_candidates: int = 0

    @property
    def points(self) -> list[Character]:
        return [ch for ch, _ in self.entries]

    def __len__(self):
        return len(self.entries)

    def as_arrays(self) -> list[np.ndarray]:
        return [ch.as_array(FLOAT) for ch in self.points]


# --- triangularization ---------------------------------------------------------


def _eigen_candidates(A: np.ndarray):
    seen = [c for c, _ in la.eigenvalue_clusters(A)]
    for z in la.eigenvalues(A):
        seen.append(complex(z))
    return seen


def _common_eigenvector(ops, derived, policy: RankPolicy, scale: float) -> np.ndarray:
    """Unit vector that every op maps to a multiple of itself.

    ``derived`` spans the action of L^2, which is nilpotent; its common kernel
    is invariant and the remaining ops commute on it.
    """
    d = ops[0].shape[0]
    if derived:
        W = la.null_space(np.vstack(derived), policy, scale)
    else:
        W = np.eye(d, dtype=complex)
    if W.shape[1] == 0:
        raise NumericalFailure("derived algebra has no common kernel")
    for X in ops:
        if W.shape[1] == 1:
            break
        A = W.conj().T @ X @ W
        for lam in _eigen_candidates(A):
            N = la.null_space(A - lam * np.eye(A.shape[0]), policy, scale)
            if N.shape[1]:
                W = W @ N
                break
        else:
            raise NumericalFailure("no common eigenvector within tolerance")
    return W[:, 0]


def _triangularize(ops, derived, policy: RankPolicy):
    """Unitary ``U`` and diagonal values making every op upper triangular."""
    ops = [la.to_float(X) for X in ops]
    derived = [la.to_float(Z) for Z in derived]
    m = ops[0].shape[0]
    scale = max((float(np.linalg.norm(X, 2)) for X in ops), default=0.0)
    U = np.eye(m, dtype=complex)
    cur, cur_der = list(ops), list(derived)
    diag = np.zeros((m, len(ops)), dtype=complex)
    for step in range(m):
        v = _common_eigenvector(cur, cur_der, policy, scale)
        d = cur[0].shape[0]
        P, _ = np.linalg.qr(np.column_stack([v, np.eye(d, dtype=complex)]))
        P = P[:, :d]
        U[:, step:] = U[:, step:] @ P
        rotated = [P.conj().T @ X @ P for X in cur]
        diag[step] = [R[0, 0] for R in rotated]
        cur = [R[1:, 1:] for R in rotated]
        cur_der = [(P.conj().T @ Z @ P)[1:, 1:] for Z in cur_der]
    resid = 0.0
    for X in ops:
        T = U.conj().T @ X @ U
        resid = max(resid, la.max_abs(np.tril(T, -1)) / max(scale, 1e-300))
    return U, diag, resid


def _derived_ops(family: OperatorFamily, derived: SubalgebraSpec):
    return [family.combination(row) for row in derived.basis]


def _project_to_characters(vals: np.ndarray, derived: SubalgebraSpec) -> np.ndarray:
    """Remove the component along L^2 so rows vanish on it exactly in float."""
    if derived.dim == 0:
        return vals
    Z = la.to_float(derived.basis)
    Q, _ = np.linalg.qr(Z.T)  # orthonormal basis of the row space, as columns
    # f(z) = z . f; killing f(z) means projecting f off conj(row space)
    Qc = Q.conj()
    return vals - (vals @ Qc.conj()) @ Qc.T


def _snap_weights(L: LieAlgebraRep, vals: np.ndarray):
    out = []
    for row in vals:
        out.append([GaussianRational.snap(z) for z in row])
    return out


def _ops_triangular(ops) -> bool:
    return all(la.is_zero(np.tril(X, -1)) for X in ops)


def _weights_for(family: OperatorFamily, L: LieAlgebraRep, derived: SubalgebraSpec, policy):
    """Rows of weight values (one row per flag step) for an action of L."""
    if policy.backend == EXACT and _ops_triangular(family.ops):
        vals = [[X[i, i] for X in family.ops] for i in range(family.dim_E)]
        return vals, la.identity(family.dim_E, EXACT), 0.0
    fpolicy = RankPolicy(FLOAT, policy.tol)
    U, diag, resid = _triangularize(family.ops, _derived_ops(family, derived), fpolicy)
    if resid > TRIANGULAR_TOL:
        raise NumericalFailure(f"triangularization residual {resid:.3g} too large")
    diag = _project_to_characters(diag, derived)
    if policy.backend == EXACT:
        return _snap_weights(L, diag), U, resid
    return [list(row) for row in diag], U, resid


def weights(L: LieAlgebraRep, policy: RankPolicy | None = None) -> WeightList:
    """Weights of E from a simultaneous triangularization (Lie's theorem)."""
    policy = policy or RankPolicy(backend=L.backend)
    if not is_solvable(L, policy):
        raise NotSolvable("Lie's theorem needs a solvable algebra")
    derived = derived_subalgebra(L, policy)
    vals, U, resid = _weights_for(L.family, L, derived, policy)
    chars = tuple(make_character(L, row, require=False) for row in vals)
    return WeightList(chars, U, resid)


def adjoint_weights(L: LieAlgebraRep, policy: RankPolicy | None = None) -> list[Character]:
    """Weights of the adjoint representation, as characters of L."""
    policy = policy or RankPolicy(backend=L.backend)
    if not is_solvable(L, policy):
        raise NotSolvable("adjoint weights need a solvable algebra")
    derived = derived_subalgebra(L, policy)
    vals, _, _ = _weights_for(adjoint_rep(L), L, derived, policy)
    return [make_character(L, row, require=False) for row in vals]


# --- candidates ----------------------------------------------------------------


def _distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def dedup_characters(chars, tol: float = DEDUP_TOL, backend: str = FLOAT):
    """Indices of the first occurrence of each distinct character."""
    keep: list[int] = []
    if backend == EXACT:
        seen = set()
        for i, ch in enumerate(chars):
            key = tuple(ch.coords)
            if key not in seen:
                seen.add(key)
                keep.append(i)
        return keep
    arrs = [ch.as_array(FLOAT) for ch in chars]
    for i, a in enumerate(arrs):
        if all(_distance(a, arrs[j]) > tol for j in keep):
            keep.append(i)
    return keep


def _is_nonzero(ch: Character, tol: float) -> bool:
    return any(abs(x) > tol for x in ch.coords)


def candidate_characters(
    L: LieAlgebraRep,
    policy: RankPolicy | None = None,
    *,
    cap: int = CANDIDATE_CAP,
    dedup_tol: float = DEDUP_TOL,
) -> CandidateSet:
    """E-weights shifted by every signed subset sum of nonzero adjoint weights."""
    policy = policy or RankPolicy(backend=L.backend)
    wl = weights(L, policy)
    adj = [w for w in adjoint_weights(L, policy) if _is_nonzero(w, dedup_tol)]
    k = len(adj)
    if len(wl.weights) * 3**k > cap:
        raise CombinatorialBlowup(f"{len(wl.weights)} * 3^{k} candidates exceed the cap {cap}")
    backend = L.backend
    adj_arr = [w.as_array(backend) for w in adj]
    zero = la.zeros(L.n, backend)
    shifts, shift_tags = [], []
    for eps in itertools.product((0, 1, -1), repeat=k):
        s = zero
        for e, w in zip(eps, adj_arr):
            if e:
                s = s + w * e
        shifts.append(Character(tuple(s.tolist())))
        shift_tags.append(eps)
    keep = dedup_characters(shifts, dedup_tol, backend)
    chars, prov = [], []
    for wi, w in enumerate(wl.weights):
        wa = w.as_array(backend)
        for si in keep:
            chars.append(Character(tuple((wa + shifts[si].as_array(backend)).tolist())))
            prov.append((wi, shift_tags[si]))
    keep = dedup_characters(chars, dedup_tol, backend)
    warnings = []
    out, out_prov = [], []
    for i in keep:
        ch = make_character(L, chars[i].coords, require=False)
        if not ch.vanishes_on_derived:
            warnings.append(f"candidate {i} does not vanish on L^2 and was dropped")
            continue
        out.append(ch)
        out_prov.append(prov[i])
    if not all(w.vanishes_on_derived for w in wl.weights):
        warnings.append("some weights failed the character certificate (irrational weights?)")
    return CandidateSet(tuple(out), tuple(out_prov), tuple(warnings), k)


# --- decisions -----------------------------------------------------------------


def check_character(L: LieAlgebraRep, f, policy: RankPolicy | None = None) -> SpectralVerdict:
    """Decide ``f in Sp(L, E)``: some homology of the twisted complex is nonzero."""
    policy = policy or RankPolicy(backend=L.backend)
    C = build_complex(L, f, policy)
    b = betti(C, policy)
    return SpectralVerdict(C.character, not b.is_zero(), b)


def joint_spectrum(
    L: LieAlgebraRep,
    policy: RankPolicy | None = None,
    *,
    cap: int = CANDIDATE_CAP,
    dedup_tol: float = DEDUP_TOL,
) -> SpectrumResult:
    """All characters whose twisted homology is nonzero.

    Raises IncompleteCandidates instead of returning an empty set, since the
    spectrum of a solvable algebra is never empty.
    """
    policy = policy or RankPolicy(backend=L.backend)
    if not is_solvable(L, policy):
        raise NotSolvable("the joint spectrum is defined for solvable algebras")
    cands = candidate_characters(L, policy, cap=cap, dedup_tol=dedup_tol)
    entries, prov = [], []
    warnings = list(cands.warnings)
    for ch, tag in zip(cands.characters, cands.provenance):
        v = check_character(L, ch, policy)
        if v.in_spectrum:
            entries.append((v.character, v.betti))
            prov.append(tag)
            if v.betti.ill_conditioned:
                warnings.append(f"point {_fmt(v.character)} decided near the rank threshold")
    order = sorted(range(len(entries)), key=lambda i: entries[i][0].sort_key())
    result = SpectrumResult(
        [entries[i] for i in order],
        L.fingerprint(),
        policy,
        [prov[i] for i in order],
        warnings,
        len(cands.characters),
    )
    if not entries:
        raise IncompleteCandidates(
            f"none of {len(cands.characters)} candidates has nonzero homology"
        )
    return result


def _fmt(ch: Character) -> str:
    return "(" + ", ".join(str(x) for x in ch.coords) + ")"


def taylor_spectrum(family: OperatorFamily, policy: RankPolicy | None = None) -> SpectrumResult:
    """Taylor joint spectrum of a commuting tuple.

    The tuple may be linearly dependent. The result is cross-checked against
    the diagonal tuples of a simultaneous triangularization.
    """
    policy = policy or RankPolicy(backend=family.backend)
    family = family.to_backend(policy.backend)
    check_commuting(family)
    L = abelian_rep(family)
    result = joint_spectrum(L, policy)
    diagonals = weights(L, policy).weights
    keep = dedup_characters(diagonals, DEDUP_TOL, policy.backend)
    oracle = [diagonals[i] for i in keep]
    if not same_point_sets(result.points, oracle, 1e-6):
        result.warnings.append("Taylor spectrum disagrees with the joint diagonal of a triangularization")
    return result


def project_spectrum(R: SpectrumResult, I: SubalgebraSpec) -> list[Character]:
    """Restrictions of the spectrum points to the ideal I, deduplicated."""
    if not I.is_ideal:
        raise NotAnIdeal("projection is only defined onto ideals")
    restricted = [restrict_functional(ch, I) for ch in R.points]
    keep = dedup_characters(restricted, DEDUP_TOL, R.policy.backend)
    return sorted((restricted[i] for i in keep), key=Character.sort_key)


def single_operator_spectrum(x: np.ndarray, policy: RankPolicy | None = None) -> list:
    """Eigenvalue set of one operator, clusters merged to their means.

    Exact matrices that are not triangular must have rational eigenvalues;
    each is certified by an exact determinant.
    """
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ShapeMismatch(f"operator must be square, got {x.shape}")
    policy = policy or RankPolicy(backend=la.backend_of(x))
    if policy.backend == EXACT:
        x = la.to_exact(x) if x.dtype != object else x
        if _ops_triangular([x]) or _ops_triangular([x.T]):
            vals = set(la.eigenvalues(x))
        else:
            vals = set()
            I = la.identity(x.shape[0], EXACT)
            for z in single_operator_spectrum(la.to_float(x), RankPolicy(FLOAT, policy.tol)):
                s = GaussianRational.snap(z)
                if la.exact_det(x - I * s):
                    raise NumericalFailure(f"eigenvalue {z} is not a certified Gaussian rational")
                vals.add(s)
        return sorted(vals, key=GaussianRational.sort_key)
    x = la.to_float(x)
    scale = float(np.linalg.norm(x, 2))
    I = np.eye(x.shape[0])
    out: list[complex] = []
    for center, mult in la.eigenvalue_clusters(x):
        if la.null_space(x - center * I, policy, scale).shape[1]:
            pts = [center]
        else:
            raw = la.eigenvalues(x)
            pts = [complex(z) for z in raw if abs(z - center) <= la.cluster_radius(x)]
        for z in pts:
            if all(abs(z - w) > DEDUP_TOL * max(1.0, scale) for w in out):
                out.append(z)
    return sorted(out, key=lambda z: (z.real, z.imag))


def same_point_sets(A, B, tol: float) -> bool:
    """Set equality of two point lists, pointwise within ``tol`` (max-norm)."""
    a = [p.as_array(FLOAT) if isinstance(p, Character) else np.atleast_1d(np.asarray(p, dtype=complex)) for p in A]
    b = [p.as_array(FLOAT) if isinstance(p, Character) else np.atleast_1d(np.asarray(p, dtype=complex)) for p in B]
    return all(any(_distance(x, y) <= tol for y in b) for x in a) and all(
        any(_distance(x, y) <= tol for x in a) for y in b
    )
