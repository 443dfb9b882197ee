from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from liespec.errors import NotAnIdeal, NotNilpotent
from liespec.harness import (
    ALL_PROPERTIES,
    codim_one_ideals,
    random_batch,
    run_suite,
    summarize,
    verify_chain_property,
    verify_counterexample_nonideal,
    verify_derived_point_spectra,
    verify_derived_vanishing,
    verify_nilpotent_bound,
    verify_nonempty,
    verify_projection,
)
from liespec.instances import (
    InstanceSpec,
    fuzz_specs,
    builtin_example,
    random_solvable_rep,
)
from liespec.lie_structure import (
    Character,
    OperatorFamily,
    abelian_rep,
    build_rep,
    is_nilpotent,
    is_solvable,
    subspace,
)
from liespec.linalg_core import EXACT, FLOAT, RankPolicy
from liespec.spectrum import joint_spectrum

EXACT_POLICY = RankPolicy(backend=EXACT)


# --- generator -----------------------------------------------------------------


def test_one_generator_is_abelian():
    L = random_solvable_rep(InstanceSpec(1, 1, 2))
    assert L.n == 1
    assert not np.any(L.structure_constants)


@pytest.mark.parametrize("seed", range(10))
def test_generator_soundness(seed):
    L = random_solvable_rep(InstanceSpec(seed, 3, 4))
    assert is_solvable(L, RankPolicy())
    N = random_solvable_rep(InstanceSpec(seed, 3, 4, nilpotent_only=True))
    assert is_nilpotent(N, RankPolicy())


def test_generator_is_deterministic():
    a = random_solvable_rep(InstanceSpec(123, 4, 5))
    b = random_solvable_rep(InstanceSpec(123, 4, 5))
    assert a.fingerprint() == b.fingerprint()
    assert fuzz_specs(20, seed=3) == fuzz_specs(20, seed=3)


@pytest.mark.parametrize(
    "kwargs",
    [dict(m=0, n_target=1), dict(m=2, n_target=4), dict(m=1, n_target=1, nilpotent_only=True), dict(m=2, n_target=1, entry_scale=0.0)],
)
def test_instance_spec_validation(kwargs):
    with pytest.raises(ValueError):
        InstanceSpec(seed=0, **kwargs)


def test_exact_backend_generator():
    L = random_solvable_rep(InstanceSpec(4, 2, 3, conjugate=False), EXACT_POLICY)
    assert L.backend == EXACT
    assert is_solvable(L, EXACT_POLICY)


# --- individual checks on the built-in example ---------------------------------


def test_projection_on_example(backend):
    L = builtin_example(backend)
    pol = RankPolicy(backend=backend)
    r = verify_projection(L, subspace(L, [[1, 0]], pol, "span{b}"), pol)
    assert r.passed and r.applicable
    if backend == EXACT:
        assert r.witnesses["direct"] == r.witnesses["projected"] == [["0"]]
    assert verify_projection(L, subspace(L, [[1, 0], [0, 1]], pol, "L"), pol).passed
    with pytest.raises(NotAnIdeal):
        verify_projection(L, subspace(L, [[0, 1]], pol), pol)


def test_projection_failure_carries_witnesses():
    L = builtin_example()
    R = joint_spectrum(L)
    # replace a point by one with nonzero b-coordinate: projection no longer matches
    R.entries[0] = (Character((Fraction(1), Fraction(-3, 2))), R.entries[0][1])
    r = verify_projection(L, subspace(L, [[1, 0]], EXACT_POLICY, "span{b}"), EXACT_POLICY, spectrum=R)
    assert r.failed
    assert r.witnesses["direct"] != r.witnesses["projected"]
    assert r.to_dict()["witnesses"]["ideal"] == "span{b}"


def test_projection_on_abelian_lines():
    fam = OperatorFamily.from_matrices([np.diag([1.0, 2.0, 3.0]), np.diag([0.0, 1.0, -1.0])])
    L = build_rep(fam)
    rng = np.random.default_rng(0)
    for _ in range(5):
        line = subspace(L, [rng.normal(size=2)], RankPolicy())
        assert line.is_ideal
        assert verify_projection(L, line).passed


def test_nonempty_and_derived_checks_on_example(example):
    assert verify_nonempty(example).passed
    r = verify_derived_vanishing(example)
    assert r.passed and r.applicable
    assert verify_derived_point_spectra(example).passed


def test_nilpotent_bound_rejects_builtin_example():
    L = builtin_example()
    with pytest.raises(NotNilpotent):
        verify_nilpotent_bound(L)
    r = verify_nilpotent_bound(L, require_nilpotent=False)
    assert not r.applicable and not r.failed
    worst = r.witnesses["violations"][0]
    # x = a: |f(a)| = 3/2 against |a| = 1/2
    assert worst["abs_f_x"] == pytest.approx(1.5)
    assert worst["norm_x"] == pytest.approx(0.5)


def test_nilpotent_bound_on_diagonal_family():
    fam = OperatorFamily.from_matrices([np.diag([1.0, -2.0, 0.5j]), np.diag([3.0, 1.0, -1.0])])
    r = verify_nilpotent_bound(build_rep(fam))
    assert r.passed and r.applicable


def test_chain_property_exact_is_identically_zero():
    r = verify_chain_property(builtin_example(), EXACT_POLICY, seed=5)
    assert r.passed and r.witnesses["max_defect"] == 0.0
    assert r.witnesses["characters"] == 10


def test_counterexample_report(backend):
    r = verify_counterexample_nonideal(RankPolicy(backend=backend))
    assert r.passed
    got = sorted(complex(x).real for x in r.witnesses["restricted_to_a"])
    assert got == [-1.5, 0.5]
    assert sorted(complex(x).real for x in r.witnesses["spectrum_of_a"]) == [-0.5, 0.5]
    assert r.witnesses["span_a_is_ideal"] is False


# --- suites --------------------------------------------------------------------


def test_suite_on_builtin_example():
    reports = run_suite([(builtin_example(), None)])
    assert not any(r.failed for r in reports)
    summary = summarize(reports)
    assert set(summary) == set(ALL_PROPERTIES)
    assert summary["nilpotent_bound"]["not_applicable"] == 1


def test_empty_batch():
    assert run_suite([]) == []


def test_unknown_property():
    with pytest.raises(ValueError):
        run_suite([(builtin_example(), None)], properties=["nope"])


def test_suite_is_deterministic():
    specs = fuzz_specs(5, seed=9)
    one = [r.to_dict() for r in run_suite(random_batch(specs), RankPolicy())]
    two = [r.to_dict() for r in run_suite(random_batch(specs), RankPolicy())]
    assert one == two


def test_codim_one_ideals_are_ideals():
    L = random_solvable_rep(InstanceSpec(2, 4, 4))
    pol = RankPolicy()
    ideals = codim_one_ideals(L, np.random.default_rng(0), pol)
    assert ideals
    for I in ideals:
        assert I.is_ideal and I.dim == L.n - 1


def test_abelian_rep_skips_closure_checks():
    N = np.array([[0.0, 1.0], [0.0, 0.0]])
    L = abelian_rep(OperatorFamily((N, 2 * N)))
    assert verify_nonempty(L, RankPolicy(backend=FLOAT)).passed


def test_derived_vanishing_tolerates_near_defective_weights():
    # L^2 acts nilpotently, but in float its weights scatter up to ~4e-7
    # around 0; the spectrum is {0} as a set at the set tolerance
    spec = InstanceSpec(1311856947805124100, 4, 5)
    L = random_solvable_rep(spec, RankPolicy())
    r = verify_derived_vanishing(L, RankPolicy(), seed=spec.seed)
    assert r.passed and r.applicable
    pts = r.witnesses["ideals"][0]["points"]
    assert all(abs(complex(*z)) <= 1e-6 for p in pts for z in p)
