from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liespec import linalg_core as la
from liespec.errors import NotACharacter, NotClosed, NotIndependent
from liespec.instances import InstanceSpec, builtin_example, builtin_family, random_solvable_rep
from liespec.lie_structure import (
    OperatorFamily,
    adjoint_rep,
    build_rep,
    coadjoint_form_rank,
    derived_series,
    derived_subalgebra,
    is_ideal,
    is_nilpotent,
    is_solvable,
    lower_central_series,
    make_character,
    restrict_functional,
    same_subspace,
    subrep,
    subspace,
    with_sign,
)
from liespec.linalg_core import EXACT, FLOAT, RankPolicy

EXACT_POLICY = RankPolicy(backend=EXACT)


def unit(m, i, j):
    E = np.zeros((m, m), dtype=object)
    E[:] = 0
    E[i, j] = 1
    return la.to_exact(E)


def family(*mats, names=()):
    return OperatorFamily(tuple(mats), tuple(names))


def heisenberg():
    return family(unit(3, 0, 1), unit(3, 0, 2), unit(3, 1, 2), names=("E12", "E13", "E23"))


def sl2():
    h = la.to_exact(np.array([[1, 0], [0, -1]], dtype=object))
    return family(unit(2, 0, 1), unit(2, 1, 0), h, names=("e", "f", "h"))


def rows(*r):
    return la.to_exact(np.array(r, dtype=object))


# --- build_rep -----------------------------------------------------------------


def test_example_structure_constants_with_plus_sign():
    L = build_rep(builtin_family(), sign=1)
    # basis order (b, a); bracket(b, a) = ba - ab = b
    assert L.structure_constants[0, 1, 0] == 1
    assert L.structure_constants[0, 1, 1] == 0
    assert L.structure_constants[1, 0, 0] == -1


def test_identity_is_abelian():
    L = build_rep(family(la.identity(3, EXACT)))
    assert la.is_zero(L.structure_constants)


def test_e11_e12_bracket():
    L = build_rep(family(unit(2, 0, 0), unit(2, 0, 1)), sign=1)
    assert L.structure_constants[0, 1, 1] == 1
    assert L.structure_constants[0, 1, 0] == 0
    assert is_solvable(L, EXACT_POLICY) and not is_nilpotent(L, EXACT_POLICY)


def test_not_closed_and_not_independent():
    with pytest.raises(NotClosed):
        build_rep(family(unit(3, 0, 1), unit(3, 1, 0)))
    with pytest.raises(NotClosed):
        build_rep(family(unit(3, 0, 1), unit(3, 1, 0)).to_backend(FLOAT))
    with pytest.raises(NotIndependent):
        build_rep(family(unit(2, 0, 1), unit(2, 0, 1) * 2))


def test_calibrated_sign_makes_nonabelian_brackets_opposite(backend):
    # the complex only squares to zero with the opposite product
    assert builtin_example(backend).sign == -1
    assert build_rep(family(la.identity(2, EXACT))).sign == 1


# --- series ------------------------------------------------------------------


def test_example_derived_series(example, backend):
    pol = RankPolicy(backend=backend)
    series = derived_series(example, pol)
    assert [S.dim for S in series] == [2, 1, 0]
    assert same_subspace(la.as_matrix(series[1].basis, backend), la.as_matrix(rows([1, 0]), backend), pol)
    assert is_solvable(example, pol)
    assert not is_nilpotent(example, pol)
    assert [S.dim for S in lower_central_series(example, pol)] == [2, 1]


def test_heisenberg_is_nilpotent():
    L = build_rep(heisenberg())
    D = derived_subalgebra(L, EXACT_POLICY)
    assert D.dim == 1 and same_subspace(D.basis, rows([0, 1, 0]), EXACT_POLICY)
    assert [S.dim for S in lower_central_series(L, EXACT_POLICY)] == [3, 1, 0]
    assert is_nilpotent(L, EXACT_POLICY)


def test_abelian_series():
    L = build_rep(family(unit(2, 0, 0), unit(2, 1, 1)))
    assert derived_subalgebra(L, EXACT_POLICY).dim == 0
    assert [S.dim for S in derived_series(L, EXACT_POLICY)] == [2, 0]
    assert is_nilpotent(L, EXACT_POLICY)


def test_sl2_is_not_solvable():
    L = build_rep(sl2())
    assert derived_subalgebra(L, EXACT_POLICY).dim == 3
    assert not is_solvable(L, EXACT_POLICY)


# --- ideals --------------------------------------------------------------------


def test_example_ideals():
    L = builtin_example()
    assert subspace(L, [[1, 0]], EXACT_POLICY).is_ideal
    assert not subspace(L, [[0, 1]], EXACT_POLICY).is_ideal
    assert subspace(L, [[1, 0], [0, 1]], EXACT_POLICY).is_ideal
    assert is_ideal(derived_subalgebra(L, EXACT_POLICY), L, EXACT_POLICY)


# --- adjoint and coadjoint -----------------------------------------------------


def test_example_adjoint_with_plus_sign():
    L = build_rep(builtin_family(), sign=1)
    ad = adjoint_rep(L)
    # bracket(a, b) = -b, bracket(a, a) = 0
    assert np.array_equal(ad.ops[1], rows([-1, 0], [0, 0]))
    # bracket(b, b) = 0, bracket(b, a) = b
    assert np.array_equal(ad.ops[0], rows([0, 1], [0, 0]))


def test_abelian_adjoint_is_zero():
    L = build_rep(family(unit(2, 0, 0), unit(2, 1, 1)))
    assert all(la.is_zero(X) for X in adjoint_rep(L).ops)


def _check_ad_homomorphism(L):
    ad = adjoint_rep(L).ops
    c = L.structure_constants
    for i in range(L.n):
        for j in range(L.n):
            lhs = ad[i] @ ad[j] - ad[j] @ ad[i]
            rhs = sum((ad[k] * c[i, j, k] for k in range(L.n)), la.zeros(ad[0].shape, L.backend))
            if L.backend == EXACT:
                assert np.array_equal(lhs, rhs)
            else:
                assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(c).max() ** 2))


def test_ad_is_a_homomorphism_on_known_algebras():
    for fam in (builtin_family(), heisenberg(), sl2()):
        for sign in (1, -1):
            _check_ad_homomorphism(build_rep(fam, sign=sign))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4))
def test_ad_is_a_homomorphism_on_random_reps(seed, n, m):
    n = min(n, m * (m + 1) // 2)
    L = random_solvable_rep(InstanceSpec(seed, n, m))
    _check_ad_homomorphism(L)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(2, 4))
def test_random_rep_invariants(seed, n, m):
    L = random_solvable_rep(InstanceSpec(seed, min(n, m * (m + 1) // 2), m))
    pol = RankPolicy()
    c = L.structure_constants
    assert np.allclose(c, -c.transpose(1, 0, 2), atol=1e-12)
    assert is_solvable(L, pol)
    D = derived_subalgebra(L, pol)
    assert is_ideal(D, L, pol)
    if D.dim:
        assert is_nilpotent(subrep(L, D, pol), pol)
    if is_nilpotent(L, pol):
        assert is_solvable(L, pol)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(2, 4))
def test_sign_flip_keeps_series_and_negates_constants(seed, n, m):
    pol = RankPolicy()
    L = random_solvable_rep(InstanceSpec(seed, min(n, m * (m + 1) // 2), m))
    M = with_sign(L, -L.sign)
    assert np.array_equal(M.structure_constants, -L.structure_constants)
    for A, B in ((derived_series(L, pol), derived_series(M, pol)), (lower_central_series(L, pol), lower_central_series(M, pol))):
        assert [S.dim for S in A] == [S.dim for S in B]
        for S, T in zip(A, B):
            assert same_subspace(S.basis, T.basis, pol)
    assert is_solvable(L, pol) == is_solvable(M, pol)
    assert is_nilpotent(L, pol) == is_nilpotent(M, pol)
    ad_L, ad_M = adjoint_rep(L).ops, adjoint_rep(M).ops
    assert all(np.array_equal(X, -Y) for X, Y in zip(ad_L, ad_M))


def test_coadjoint_form_rank():
    L = builtin_example()
    assert coadjoint_form_rank([1, 0], L, EXACT_POLICY) == 2
    assert coadjoint_form_rank([0, Fraction(1, 2)], L, EXACT_POLICY) == 0
    A = build_rep(family(unit(2, 0, 0), unit(2, 1, 1)))
    assert coadjoint_form_rank([3, 5], A, EXACT_POLICY) == 0


# --- characters and restriction ------------------------------------------------


def test_make_character_rejects_nonvanishing():
    L = builtin_example()
    with pytest.raises(NotACharacter):
        make_character(L, [1, 0])
    ch = make_character(L, [0, "1/2"])
    assert ch.vanishes_on_derived


def test_restrict_functional():
    L = builtin_example()
    f = make_character(L, [0, Fraction(1, 2)])
    assert restrict_functional(f, subspace(L, [[1, 0]], EXACT_POLICY)).coords == (0,)
    assert restrict_functional(f, subspace(L, [[0, 1]], EXACT_POLICY)).coords == (Fraction(1, 2),)
    full = subspace(L, [[1, 0], [0, 1]], EXACT_POLICY)
    assert restrict_functional(f, full).coords == f.coords
