"""Built-in and randomly generated operator families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg_core as la
from .lie_structure import LieAlgebraRep, OperatorFamily, build_rep, is_nilpotent, is_solvable
from .linalg_core import EXACT, FLOAT, RankPolicy

EXAMPLE_A = [["0", "1/2"], ["1/2", "0"]]
EXAMPLE_B = [["1", "1"], ["-1", "-1"]]


def builtin_family(backend: str = EXACT) -> OperatorFamily:
    """The two-dimensional example: ``b`` nilpotent, ``a`` with ``[b, a] = b``."""
    mats = [la.as_matrix(np.array(M, dtype=object), EXACT) for M in (EXAMPLE_B, EXAMPLE_A)]
    return OperatorFamily(tuple(mats), ("b", "a")).to_backend(backend)


def builtin_example(backend: str = EXACT) -> LieAlgebraRep:
    return build_rep(builtin_family(backend), policy=RankPolicy(backend=backend))


@dataclass(frozen=True)
class InstanceSpec:
    seed: int
    n_target: int
    m: int
    nilpotent_only: bool = False
    entry_scale: float = 1.0
    #: conjugate the triangular construction by a random unitary
    conjugate: bool = True

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("dim E must be at least 1")
        top = self.m * (self.m - 1) // 2 if self.nilpotent_only else self.m * (self.m + 1) // 2
        if not 1 <= self.n_target <= max(top, 1):
            raise ValueError(f"n_target must lie in 1..{top}")
        if self.nilpotent_only and self.m < 2:
            raise ValueError("nilpotent instances need dim E >= 2")
        if not self.entry_scale > 0:
            raise ValueError("entry_scale must be positive")


def _disc(rng: np.random.Generator, size, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(size))
    theta = 2 * np.pi * rng.random(size)
    return r * np.exp(1j * theta)


def random_unitary(rng: np.random.Generator, m: int) -> np.ndarray:
    Z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _random_triangular(rng, m: int, strict: bool, scale: float) -> np.ndarray:
    """Sparse random (strictly) upper-triangular matrix of one of three kinds."""
    X = np.zeros((m, m), dtype=complex)
    iu = np.triu_indices(m, 1)
    kind = rng.integers(3)
    if not strict and (kind == 0 or m == 1):
        X[np.diag_indices(m)] = _disc(rng, m, scale)
        return X
    if len(iu[0]) == 0:
        return X
    if kind == 1:
        k = rng.integers(len(iu[0]))
        X[iu[0][k], iu[1][k]] = _disc(rng, 1, scale)[0]
    else:
        mask = rng.random(len(iu[0])) < rng.uniform(0.15, 0.5)
        X[iu[0][mask], iu[1][mask]] = _disc(rng, int(mask.sum()), scale)
        if not strict and rng.random() < 0.5:
            X[np.diag_indices(m)] = _disc(rng, m, scale)
    return X


def _closure(gens, cap: int, tol: float = 1e-10):
    """Span of ``gens`` closed under commutators, or None past ``cap`` dims."""
    basis: list[np.ndarray] = []
    ortho: list[np.ndarray] = []

    def add(M: np.ndarray, keep: bool) -> bool:
        v = M.reshape(-1)
        size = np.linalg.norm(v)
        if size == 0:
            return False
        r = v.copy()
        for _ in range(2):
            for q in ortho:
                r = r - q * (q.conj() @ r)
        if np.linalg.norm(r) <= tol * size:
            return False
        ortho.append(r / np.linalg.norm(r))
        basis.append(M if keep else r.reshape(M.shape) / np.linalg.norm(r))
        return True

    for g in gens:
        add(g, True)
    i = 0
    while i < len(basis):
        for j in range(i):
            if add(la.commutator(basis[i], basis[j]), False) and len(basis) > cap:
                return None
        i += 1
    return basis


def random_solvable_rep(spec: InstanceSpec, policy: RankPolicy | None = None) -> LieAlgebraRep:
    """Seeded random solvable (or nilpotent) matrix Lie algebra.

    Sparse random upper-triangular generators are added one at a time and
    the span is closed under brackets; a generator whose closure would exceed
    ``n_target`` dimensions is discarded. All draws come from one seeded
    stream, so the result depends only on the InstanceSpec.
    """
    policy = policy or RankPolicy()
    rng = np.random.default_rng(spec.seed)
    m, strict = spec.m, spec.nilpotent_only
    basis: list[np.ndarray] = []
    misses = 0
    while len(basis) < spec.n_target and misses < 30:
        g = _random_triangular(rng, m, strict, spec.entry_scale)
        grown = _closure(basis + [g], spec.n_target) if np.any(g) else None
        if grown is None or len(grown) == len(basis):
            misses += 1
            continue
        basis = grown
    if not basis:  # pragma: no cover - needs 30 consecutive empty draws
        basis = [np.eye(m, dtype=complex) if not strict else np.eye(m, k=1, dtype=complex)]
    if spec.conjugate:
        U = random_unitary(rng, m)
        basis = [U @ X @ U.conj().T for X in basis]
    names = tuple(f"X{i + 1}" for i in range(len(basis)))
    L = build_rep(OperatorFamily(tuple(basis), names), policy=RankPolicy(FLOAT, policy.tol))
    if policy.backend == EXACT:
        L = build_rep(L.family.to_backend(EXACT), L.sign, policy)
    assert is_solvable(L, policy)
    assert not spec.nilpotent_only or is_nilpotent(L, policy)
    return L


def fuzz_specs(count: int, seed: int = 0, max_n: int = 4, max_m: int = 5, nilpotent_only: bool = False):
    """Deterministic batch of instance specs with ``n <= max_n``, ``m <= max_m``.

    The dimension cap is at least 2 whenever dim E allows it.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        lo = 2 if nilpotent_only else 1
        m = int(rng.integers(lo, max_m + 1))
        top = m * (m - 1) // 2 if nilpotent_only else m * (m + 1) // 2
        n = int(rng.integers(min(2, top), min(max_n, top) + 1))
        out.append(InstanceSpec(int(rng.integers(2**63)), n, m, nilpotent_only))
    return out


def random_commuting_family(seed: int, max_n: int = 3, max_m: int = 5):
    """Commuting family plus its joint-diagonal oracle.

    Either ``S D_i S^-1`` with random diagonals, or polynomials ``p_i(T)`` in
    one upper-triangular T whose diagonal repeats values (so non-trivial
    Jordan structure occurs), conjugated by a random well-conditioned S.
    Returns ``(family, oracle)`` where ``oracle`` lists the diagonal tuples.
    """
    rng = np.random.default_rng(seed)
    while True:
        m = int(rng.integers(1, max_m + 1))
        n = int(rng.integers(1, max_n + 1))
        S = random_unitary(rng, m) @ (np.eye(m) + 0.25 * _disc(rng, (m, m), 1.0) / np.sqrt(m))
        Sinv = np.linalg.inv(S)
        if rng.random() < 0.5:
            D = _disc(rng, (n, m), 1.0)
            tri = [np.diag(row) for row in D]
        else:
            pool = _disc(rng, max(1, m - 1), 1.0)
            T = np.triu(_disc(rng, (m, m), 1.0), 1)
            T[np.diag_indices(m)] = rng.choice(pool, size=m)
            tri = []
            for _ in range(n):
                coefs = _disc(rng, m, 1.0)
                P = np.zeros((m, m), dtype=complex)
                power = np.eye(m, dtype=complex)
                for c in coefs:
                    P = P + c * power
                    power = power @ T
                tri.append(P)
        V = np.stack([X.reshape(-1) for X in tri], axis=1)
        if np.linalg.matrix_rank(V, tol=1e-6) < n:
            continue
        oracle = [tuple(X[j, j] for X in tri) for j in range(m)]
        ops = tuple(S @ X @ Sinv for X in tri)
        return OperatorFamily(ops, tuple(f"A{i + 1}" for i in range(n))), oracle
