"""Scalar backends and the dense matrix kernel.

Two backends share one interface:

* ``"float"``: ``numpy.complex128`` arrays, ranks from singular values.
* ``"exact"``: object arrays of :class:`GaussianRational`, ranks from exact
  Gaussian elimination.

A matrix's backend is read off its dtype; nothing else is stored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import (
    BackendMismatch,
    ConvergenceFailure,
    MalformedInput,
    NonFiniteEntry,
    ShapeMismatch,
)

FLOAT = "float"
EXACT = "exact"
BACKENDS = (FLOAT, EXACT)

_EPS = np.finfo(float).eps


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Rational)) and not isinstance(x, bool):
            return cls(x)
        if isinstance(x, str):
            return cls.parse(x)
        raise BackendMismatch(f"cannot use {type(x).__name__} {x!r} as an exact scalar")

    @classmethod
    def from_complex(cls, z: complex) -> "GaussianRational":
        """Exact value of a binary float (no rounding)."""
        z = complex(z)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            raise NonFiniteEntry(f"non-finite value {z!r}")
        return cls(Fraction(z.real), Fraction(z.imag))

    @classmethod
    def snap(cls, z: complex, max_denominator: int = 10**6) -> "GaussianRational":
        """Closest Gaussian rational with bounded denominators."""
        z = complex(z)
        return cls(
            Fraction(z.real).limit_denominator(max_denominator),
            Fraction(z.imag).limit_denominator(max_denominator),
        )

    _NUM = r"(?:\d+/\d+|\d*\.\d+|\d+\.?)"
    _PART = rf"[+-]?{_NUM}"
    _FULL = re.compile(rf"^\s*({_PART})?\s*(?:([+-])\s*({_NUM})?\s*\*?\s*[ij])?\s*$")
    _IMAG_ONLY = re.compile(rf"^\s*({_PART})?\s*\*?\s*[ij]\s*$")

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Parse ``"p/q"``, ``"p/q+r/s i"``, ``"r/s i"`` or ``"i"``.

        Decimal literals such as ``"0.5"`` are read as exact decimals.
        """
        s = text.strip()
        if not s:
            raise MalformedInput("empty exact scalar")
        m = cls._IMAG_ONLY.match(s)
        if m:
            coef = m.group(1)
            if coef in (None, "+", "-"):
                coef = (coef or "") + "1"
            return cls(0, Fraction(coef))
        m = cls._FULL.match(s)
        if not m or (m.group(1) is None and m.group(2) is None):
            raise MalformedInput(f"bad exact scalar {text!r}")
        re_part = Fraction(m.group(1)) if m.group(1) is not None else Fraction(0)
        im_part = Fraction(0)
        if m.group(2) is not None:
            im_part = Fraction(m.group(3) or "1")
            if m.group(2) == "-":
                im_part = -im_part
        return cls(re_part, im_part)

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except BackendMismatch:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except BackendMismatch:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except BackendMismatch:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except BackendMismatch:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by exact zero")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / den, (self.im * o.re - self.re * o.im) / den
        )

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __abs__(self):
        return abs(complex(self))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except BackendMismatch:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        # equal to the hash of the matching int or Fraction when real
        return hash(self.re) if self.im == 0 else hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def sort_key(self):
        return (self.re, self.im)

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im} i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)} i"

    def __repr__(self):
        return f"GaussianRational({self})"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)


@dataclass(frozen=True)
class RankPolicy:
    """How rank decisions are made.

    ``tol`` is the relative singular-value tolerance of the float backend; a
    singular value counts when it exceeds ``tol * sigma_max * max(rows, cols)``.
    The exact backend ignores it.
    """

    backend: str = FLOAT
    tol: float = 1e-9

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")


DEFAULT_POLICY = RankPolicy()
EXACT_POLICY = RankPolicy(backend=EXACT)


# --- construction / conversion -------------------------------------------------


def backend_of(M: np.ndarray) -> str:
    return EXACT if M.dtype == object else FLOAT


def as_matrix(data, backend: str | None = None) -> np.ndarray:
    """Coerce ``data`` to a 2-d matrix of the given backend.

    With ``backend=None`` the backend is inferred: object input stays exact,
    anything numeric becomes float.
    """
    if isinstance(data, np.ndarray) and data.dtype == object and backend in (None, EXACT):
        M = np.array(data, dtype=object)
        backend = EXACT
    elif backend is None:
        M = np.asarray(data)
        backend = EXACT if M.dtype == object else FLOAT
    else:
        M = np.asarray(data, dtype=object if backend == EXACT else None)
    if M.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d matrix, got shape {M.shape}")
    if backend == EXACT:
        return to_exact(M)
    return to_float(M)


def to_float(M: np.ndarray) -> np.ndarray:
    if M.dtype == object:
        out = np.array([complex(x) for x in M.flat], dtype=complex).reshape(M.shape)
    else:
        out = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(out)):
        raise NonFiniteEntry("matrix has NaN or Inf entries")
    return out


def to_exact(M: np.ndarray) -> np.ndarray:
    """Exact copy of ``M``; float entries are converted without rounding."""
    out = np.empty(M.shape, dtype=object)
    for idx, x in np.ndenumerate(M):
        if isinstance(x, (complex, float, np.complexfloating, np.floating)):
            out[idx] = GaussianRational.from_complex(x)
        elif isinstance(x, np.integer):
            out[idx] = GaussianRational(int(x))
        else:
            out[idx] = GaussianRational.coerce(x)
    return out


def identity(m: int, backend: str = FLOAT) -> np.ndarray:
    if backend == EXACT:
        out = zeros((m, m), EXACT)
        for i in range(m):
            out[i, i] = ONE
        return out
    return np.eye(m, dtype=complex)


def zeros(shape, backend: str = FLOAT) -> np.ndarray:
    if backend == EXACT:
        out = np.empty(shape, dtype=object)
        out.fill(ZERO)
        return out
    return np.zeros(shape, dtype=complex)


def scalar(x, backend: str):
    if backend == EXACT:
        if isinstance(x, (complex, float, np.complexfloating, np.floating)):
            return GaussianRational.from_complex(x)
        return GaussianRational.coerce(x)
    return complex(x)


def _check_policy(M: np.ndarray, policy: RankPolicy):
    if backend_of(M) != policy.backend:
        raise BackendMismatch(
            f"matrix backend {backend_of(M)!r} does not match policy backend {policy.backend!r}"
        )


def _check_finite(M: np.ndarray):
    if M.dtype != object and not np.all(np.isfinite(M)):
        raise NonFiniteEntry("matrix has NaN or Inf entries")


# --- basic operations ----------------------------------------------------------


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``AB - BA``."""
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
        raise ShapeMismatch(f"commutator needs equal square shapes, got {A.shape} and {B.shape}")
    if backend_of(A) != backend_of(B):
        raise BackendMismatch("commutator operands use different backends")
    return A @ B - B @ A


def max_abs(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    if M.dtype == object:
        return max(abs(x) for x in M.flat)
    return float(np.max(np.abs(M)))


def is_zero(M: np.ndarray, atol: float = 0.0) -> bool:
    if M.dtype == object:
        return not any(M.flat)
    return max_abs(M) <= atol


# --- exact elimination ---------------------------------------------------------


def rref(M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over the Gaussian rationals."""
    R = np.array(M, dtype=object, copy=True)
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot = next((i for i in range(r, rows) if R[i, c]), None)
        if pivot is None:
            continue
        if pivot != r:
            R[[r, pivot]] = R[[pivot, r]]
        inv = ONE / R[r, c]
        R[r] = [x * inv for x in R[r]]
        for i in range(rows):
            if i != r and R[i, c]:
                factor = R[i, c]
                R[i] = [x - factor * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R, pivots


def exact_det(M: np.ndarray):
    R = np.array(M, dtype=object, copy=True)
    n = R.shape[0]
    det = ONE
    for c in range(n):
        pivot = next((i for i in range(c, n) if R[i, c]), None)
        if pivot is None:
            return ZERO
        if pivot != c:
            R[[c, pivot]] = R[[pivot, c]]
            det = -det
        det = det * R[c, c]
        for i in range(c + 1, n):
            if R[i, c]:
                factor = R[i, c] / R[c, c]
                R[i] = [x - factor * y for x, y in zip(R[i], R[c])]
    return det


# --- rank and friends ----------------------------------------------------------


def singular_values(M: np.ndarray) -> np.ndarray:
    M = to_float(M) if M.dtype == object else M
    _check_finite(M)
    if M.size == 0:
        return np.zeros(0)
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc


def rank_threshold(
    sv: np.ndarray, shape: tuple[int, int], policy: RankPolicy, scale: float = 0.0
) -> float:
    """``tol * max(sigma_max, scale) * max(rows, cols)``.

    ``scale`` is an absolute floor for matrices whose entries should be
    compared with some outside magnitude, e.g. a commutator that ought to
    vanish.
    """
    top = max(float(sv[0]) if sv.size else 0.0, scale)
    return policy.tol * top * max(shape)


def rank_details(
    M: np.ndarray, policy: RankPolicy = DEFAULT_POLICY, scale: float = 0.0
) -> tuple[int, bool]:
    """Rank plus a flag telling whether some singular value sits within a
    factor 10 of the rank threshold (always ``False`` on the exact backend)."""
    _check_policy(M, policy)
    if M.size == 0:
        return 0, False
    if policy.backend == EXACT:
        return len(rref(M)[1]), False
    sv = singular_values(M)
    if sv[0] == 0.0:
        return 0, False
    thr = rank_threshold(sv, M.shape, policy, scale)
    near = bool(np.any((sv > thr / 10) & (sv < thr * 10)))
    return int(np.count_nonzero(sv > thr)), near


def rank(M: np.ndarray, policy: RankPolicy = DEFAULT_POLICY, scale: float = 0.0) -> int:
    return rank_details(M, policy, scale)[0]


def kernel_dim(M: np.ndarray, policy: RankPolicy = DEFAULT_POLICY) -> int:
    return M.shape[1] - rank(M, policy)


def null_space(
    M: np.ndarray, policy: RankPolicy = DEFAULT_POLICY, scale: float = 0.0
) -> np.ndarray:
    """Columns spanning the kernel (orthonormal on the float backend).

    ``scale`` floors the ``sigma_max`` used in the float threshold, for
    matrices that are tiny compared to the problem they come from.
    """
    _check_policy(M, policy)
    cols = M.shape[1]
    if policy.backend == EXACT:
        R, pivots = rref(M)
        free = [c for c in range(cols) if c not in pivots]
        basis = zeros((cols, len(free)), EXACT)
        for k, c in enumerate(free):
            basis[c, k] = ONE
            for r, p in enumerate(pivots):
                basis[p, k] = -R[r, c]
        return basis
    if M.shape[0] == 0:
        return np.eye(cols, dtype=complex)
    _check_finite(M)
    _, sv, vh = np.linalg.svd(M)
    r = int(np.count_nonzero(sv > rank_threshold(sv, M.shape, policy, scale)))
    return vh[r:].conj().T


def row_basis(rows: np.ndarray, policy: RankPolicy = DEFAULT_POLICY, scale: float = 0.0) -> np.ndarray:
    """Linearly independent rows spanning the same space as ``rows``
    (orthonormal on the float backend)."""
    n = rows.shape[1]
    if rows.shape[0] == 0:
        return zeros((0, n), policy.backend)
    _check_policy(rows, policy)
    if policy.backend == EXACT:
        R, pivots = rref(rows)
        return R[: len(pivots)]
    _, sv, vh = np.linalg.svd(rows)
    if sv[0] == 0:
        return np.zeros((0, n), dtype=complex)
    r = int(np.count_nonzero(sv > rank_threshold(sv, rows.shape, policy, scale)))
    return vh[:r]


# --- spectra and norms ---------------------------------------------------------


def eigenvalues(M: np.ndarray) -> np.ndarray:
    """Eigenvalues with algebraic multiplicity.

    Exact matrices are accepted only when upper or lower triangular; their
    diagonal is returned exactly.
    """
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatch(f"eigenvalues need a square matrix, got {M.shape}")
    if M.dtype == object:
        if not (is_zero(np.tril(M, -1)) or is_zero(np.triu(M, 1))):
            raise BackendMismatch("exact eigenvalues are only available for triangular matrices")
        return np.array([M[i, i] for i in range(M.shape[0])], dtype=object)
    _check_finite(M)
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc


def cluster_radius(M: np.ndarray) -> float:
    """Merge radius for eigenvalues of ``M``.

    A defective eigenvalue of multiplicity k is perturbed by roughly
    ``(eps * |M|) ** (1/k)``; the radius covers that for k = dim M.
    """
    m = M.shape[0]
    scale = max(float(np.linalg.norm(M, 2)), 1e-300)
    return scale * max((1e3 * _EPS * m) ** (1.0 / m), 1e-12)


def eigenvalue_clusters(M: np.ndarray) -> list[tuple[complex, int]]:
    """Group float eigenvalues that cannot be told apart numerically.

    Returns ``(center, multiplicity)`` pairs, center = cluster mean, sorted
    by (re, im). Cluster means of defective eigenvalues are accurate to
    working precision even when the individual eigenvalues are not.
    """
    vals = eigenvalues(M)
    if vals.size == 0:
        return []
    radius = cluster_radius(M)
    # single linkage via union-find
    parent = list(range(len(vals)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) <= radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i, v in enumerate(vals):
        groups.setdefault(find(i), []).append(complex(v))
    out = [(complex(np.mean(g)), len(g)) for g in groups.values()]
    return sorted(out, key=lambda t: (t[0].real, t[0].imag))


def operator_norm(M: np.ndarray):
    """Largest singular value.

    On the exact backend the result is returned as a ``Fraction`` when the
    float value rounds to a rational whose square is certified, by an exact
    determinant, to be an eigenvalue of ``M^H M``; otherwise as a float.
    """
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatch(f"operator norm needs a square matrix, got {M.shape}")
    sv = singular_values(M)
    value = float(sv[0]) if sv.size else 0.0
    if M.dtype != object:
        return value
    s = Fraction(value).limit_denominator(10**6)
    gram = np.array([[x.conjugate() for x in row] for row in M.T], dtype=object) @ M
    shifted = gram - identity(M.shape[0], EXACT) * GaussianRational(s * s)
    if not exact_det(shifted):
        return s
    return value
