"""Machine checks of the structural properties of the joint spectrum.

Every check returns a :class:`TheoremReport`. A failing report always carries
witnesses (seed, characters, Betti vectors) that replay the failure.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from . import linalg_core as la
from .errors import IncompleteCandidates, LieSpecError, NotAnIdeal, NotNilpotent
from .homology_engine import CHAIN_TOL, betti, build_complex
from .instances import InstanceSpec, builtin_example, random_solvable_rep
from .lie_structure import (
    LieAlgebraRep,
    SubalgebraSpec,
    annihilator,
    derived_subalgebra,
    derived_series,
    is_ideal,
    is_nilpotent,
    lower_central_series,
    restrict_functional,
    subrep,
    subspace,
)
from .linalg_core import EXACT, FLOAT, RankPolicy
from .serialize import jsonable, point
from .spectrum import (
    SpectrumResult,
    candidate_characters,
    joint_spectrum,
    project_spectrum,
    same_point_sets,
    single_operator_spectrum,
)

SET_TOL = 1e-6
EIGEN_TOL = 1e-8
NORM_TOL = 1e-8


@dataclass
class TheoremReport:
    theorem: str
    fingerprint: str
    passed: bool
    applicable: bool = True
    witnesses: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None
    note: str = ""

    @property
    def failed(self) -> bool:
        return self.applicable and not self.passed

    def to_dict(self) -> dict:
        return jsonable(asdict(self))


def _points(chars) -> list:
    return [point(ch) for ch in chars]


def _spectrum_or_none(L, policy):
    try:
        return joint_spectrum(L, policy), None
    except IncompleteCandidates as exc:
        return None, str(exc)


def _vacuous(name: str, L: LieAlgebraRep, note: str, seed=None, **witnesses) -> TheoremReport:
    return TheoremReport(name, L.fingerprint(), True, False, witnesses, {}, seed, note)


# --- individual checks ---------------------------------------------------------


def _same_sets(A, B, backend: str) -> bool:
    if backend == EXACT:
        return {tuple(ch.coords) for ch in A} == {tuple(ch.coords) for ch in B}
    return same_point_sets(A, B, SET_TOL)


def verify_projection(
    L: LieAlgebraRep,
    I: SubalgebraSpec,
    policy: RankPolicy | None = None,
    *,
    spectrum: SpectrumResult | None = None,
    seed=None,
) -> TheoremReport:
    """Spectrum of an ideal equals the restriction of the spectrum of L."""
    policy = policy or RankPolicy(backend=L.backend)
    if not (I.is_ideal and is_ideal(I, L, policy)):
        raise NotAnIdeal(f"{I.name or 'subspace'} is not an ideal")
    tol = {"set": SET_TOL}
    if I.dim == 0:
        return TheoremReport(
            "projection", L.fingerprint(), True, True, {"ideal": I.name, "dim": 0}, tol, seed,
            "zero ideal: both sides are the single empty functional",
        )
    full = spectrum or joint_spectrum(L, policy)
    projected = project_spectrum(full, I)
    direct = joint_spectrum(subrep(L, I, policy), policy).points
    ok = _same_sets(direct, projected, policy.backend)
    witnesses = {
        "ideal": I.name,
        "ideal_basis": I.basis,
        "direct": _points(direct),
        "projected": _points(projected),
    }
    return TheoremReport("projection", L.fingerprint(), ok, True, witnesses, tol, seed)


def verify_nonempty(L: LieAlgebraRep, policy: RankPolicy | None = None, *, seed=None) -> TheoremReport:
    policy = policy or RankPolicy(backend=L.backend)
    R, err = _spectrum_or_none(L, policy)
    if R is None:
        cands = candidate_characters(L, policy)
        return TheoremReport(
            "nonempty", L.fingerprint(), False, True,
            {"error": err, "candidates": _points(cands.characters)}, {}, seed,
        )
    return TheoremReport(
        "nonempty", L.fingerprint(), True, True,
        {"points": len(R), "candidates": R.n_candidates}, {}, seed,
    )


def verify_finiteness(L: LieAlgebraRep, policy: RankPolicy | None = None, *, seed=None) -> TheoremReport:
    """Finite-dimensional shadow of compactness: a finite, bounded candidate-
    controlled set of finite points."""
    policy = policy or RankPolicy(backend=L.backend)
    R = joint_spectrum(L, policy)
    cands = candidate_characters(L, policy)
    bound = L.dim_E * 3**cands.adjoint_shifts
    finite = all(math.isfinite(abs(complex(x))) for ch in R.points for x in ch.coords)
    ok = finite and len(R) <= len(cands.characters) <= bound
    return TheoremReport(
        "finiteness", L.fingerprint(), ok, True,
        {"points": len(R), "candidates": len(cands.characters), "bound": bound}, {}, seed,
    )


def _unit_probes(L: LieAlgebraRep, rng: np.random.Generator, count: int) -> list[np.ndarray]:
    probes = [row for row in np.eye(L.n, dtype=complex)]
    for _ in range(count):
        z = rng.normal(size=L.n) + 1j * rng.normal(size=L.n)
        probes.append(z / np.linalg.norm(z))
    return probes


def verify_nilpotent_bound(
    L: LieAlgebraRep,
    policy: RankPolicy | None = None,
    *,
    probes: int = 100,
    seed=None,
    require_nilpotent: bool = True,
) -> TheoremReport:
    """``|f(x)| <= |x|`` for spectrum points f and probe elements x.

    On a non-nilpotent algebra this raises NotNilpotent, or with
    ``require_nilpotent=False`` reports as not applicable while still listing
    any violations found.
    """
    policy = policy or RankPolicy(backend=L.backend)
    nilpotent = is_nilpotent(L, policy)
    if not nilpotent and require_nilpotent:
        raise NotNilpotent("the norm bound is stated for nilpotent algebras")
    rng = np.random.default_rng(seed if seed is not None else 0)
    R = joint_spectrum(L, policy)
    violations, worst = [], -math.inf
    fam = L.family.to_backend(FLOAT)
    for x in _unit_probes(L, rng, probes):
        norm = la.operator_norm(fam.combination(x))
        for ch in R.points:
            val = abs(complex(np.dot(x, ch.as_array(FLOAT))))
            worst = max(worst, val - norm)
            if val > norm + NORM_TOL:
                violations.append({"point": point(ch), "x": x, "abs_f_x": val, "norm_x": norm})
    witnesses = {"points": _points(R.points), "max_excess": worst, "violations": violations[:5]}
    tol = {"norm": NORM_TOL}
    if not nilpotent:
        return TheoremReport(
            "nilpotent_bound", L.fingerprint(), not violations, False, witnesses, tol, seed,
            "precondition rejected: algebra is not nilpotent",
        )
    return TheoremReport("nilpotent_bound", L.fingerprint(), not violations, True, witnesses, tol, seed)


def _ideals_in_derived(L: LieAlgebraRep, policy: RankPolicy) -> list[SubalgebraSpec]:
    """L^2 and the nonzero deeper terms of the derived and lower central series."""
    out: list[SubalgebraSpec] = []
    for S in derived_series(L, policy)[1:] + lower_central_series(L, policy)[2:]:
        if S.dim and not any(
            S.dim == T.dim and la.rank(np.vstack([S.basis, T.basis]), policy) == S.dim for T in out
        ):
            out.append(S)
    return out


def _is_zero_set(chars, backend: str) -> bool:
    """Set equality with {0}: exact on the exact backend, within SET_TOL on
    float, where near-defective weights may leave several points that the
    tighter dedup tolerance keeps apart."""
    if not chars:
        return False
    if backend == EXACT:
        return len(chars) == 1 and not any(chars[0].coords)
    return all(abs(complex(x)) <= SET_TOL for ch in chars for x in ch.coords)


def verify_derived_vanishing(L: LieAlgebraRep, policy: RankPolicy | None = None, *, seed=None) -> TheoremReport:
    """Spectrum of L^2, and of ideals inside it, is the single point 0."""
    policy = policy or RankPolicy(backend=L.backend)
    ideals = _ideals_in_derived(L, policy)
    if not ideals:
        return _vacuous("derived_vanishing", L, "L^2 = 0", seed)
    results, ok = [], True
    for I in ideals:
        pts = joint_spectrum(subrep(L, I, policy), policy).points
        good = _is_zero_set(pts, policy.backend)
        ok = ok and good
        results.append({"ideal": I.name, "dim": I.dim, "points": _points(pts), "ok": good})
    return TheoremReport("derived_vanishing", L.fingerprint(), ok, True, {"ideals": results}, {"set": SET_TOL}, seed)


def _derived_probes(L: LieAlgebraRep, D: SubalgebraSpec, rng, count: int) -> list[np.ndarray]:
    fam = L.family.to_backend(FLOAT)
    coeffs = [row for row in la.to_float(D.basis)]
    for _ in range(count):
        w = rng.normal(size=D.dim) + 1j * rng.normal(size=D.dim)
        coeffs.append(w @ la.to_float(D.basis))
    out = []
    for c in coeffs:
        X = fam.combination(c)
        out.append(X / la.operator_norm(X))
    return out


def _zero_point_spectrum(X: np.ndarray) -> tuple[bool, list]:
    sp = single_operator_spectrum(X, RankPolicy())
    return all(abs(z) <= EIGEN_TOL for z in sp), sp


def verify_derived_point_spectra(
    L: LieAlgebraRep, policy: RankPolicy | None = None, *, probes: int = 20, seed=None
) -> TheoremReport:
    """Every element of L^2 has spectrum {0} (probes normalized to norm 1)."""
    policy = policy or RankPolicy(backend=L.backend)
    D = derived_subalgebra(L, policy)
    if D.dim == 0:
        return _vacuous("derived_point_spectra", L, "L^2 = 0", seed)
    rng = np.random.default_rng(seed if seed is not None else 0)
    bad = []
    for X in _derived_probes(L, D, rng, probes):
        ok, sp = _zero_point_spectrum(X)
        if not ok:
            bad.append({"operator": X, "spectrum": sp})
    return TheoremReport(
        "derived_point_spectra", L.fingerprint(), not bad, True,
        {"probes": D.dim + probes, "failures": bad[:3]}, {"eigenvalue": EIGEN_TOL}, seed,
    )


def verify_zero_spectrum_points(
    L: LieAlgebraRep, policy: RankPolicy | None = None, *, probes: int = 20, seed=None
) -> TheoremReport:
    """Nilpotent L with spectrum {0}: every element has point spectrum {0}.

    Reports as not applicable (a vacuity count) when the hypothesis fails.
    """
    policy = policy or RankPolicy(backend=L.backend)
    if not is_nilpotent(L, policy):
        return _vacuous("zero_spectrum_points", L, "algebra is not nilpotent", seed)
    R = joint_spectrum(L, policy)
    if not _is_zero_set(R.points, policy.backend):
        return _vacuous("zero_spectrum_points", L, "spectrum is not {0}", seed, points=_points(R.points))
    rng = np.random.default_rng(seed if seed is not None else 0)
    whole = SubalgebraSpec(la.identity(L.n, L.backend), True, "L")
    bad = []
    for X in _derived_probes(L, whole, rng, probes):
        ok, sp = _zero_point_spectrum(X)
        if not ok:
            bad.append({"operator": X, "spectrum": sp})
    return TheoremReport(
        "zero_spectrum_points", L.fingerprint(), not bad, True,
        {"probes": L.n + probes, "failures": bad[:3]}, {"eigenvalue": EIGEN_TOL}, seed,
    )


def verify_chain_property(
    L: LieAlgebraRep, policy: RankPolicy | None = None, *, characters: int = 10, seed=None
) -> TheoremReport:
    """``d o d = 0`` and zero Euler characteristic at random characters."""
    policy = policy or RankPolicy(backend=L.backend)
    rng = np.random.default_rng(seed if seed is not None else 0)
    ann = annihilator(derived_subalgebra(L, policy), policy)
    worst, euler_bad, samples = 0.0, [], 0
    for _ in range(characters):
        if policy.backend == EXACT:
            # small Gaussian-integer combinations keep exact entries short
            w = [la.GaussianRational(int(a), int(b)) for a, b in rng.integers(-3, 4, size=(ann.shape[0], 2))]
            f = [sum((w[r] * ann[r, j] for r in range(ann.shape[0])), la.ZERO) for j in range(L.n)]
        else:
            f = (rng.normal(size=ann.shape[0]) + 1j * rng.normal(size=ann.shape[0])) @ ann
        C = build_complex(L, f, policy)
        worst = max(worst, C.chain_defect())
        b = betti(C, policy)
        samples += 1
        if b.euler_characteristic() != 0:
            euler_bad.append({"character": list(f), "betti": list(b.values)})
    limit = 0.0 if policy.backend == EXACT else CHAIN_TOL
    ok = worst <= limit and not euler_bad
    return TheoremReport(
        "chain", L.fingerprint(), ok, True,
        {"characters": samples, "max_defect": worst, "euler_failures": euler_bad}, {"chain": limit}, seed,
    )


def verify_counterexample_nonideal(policy: RankPolicy | None = None) -> TheoremReport:
    """On the built-in example, restriction to the non-ideal span{a} is not the
    spectrum of a, while restriction to the ideal span{b} is."""
    policy = policy or RankPolicy(backend=EXACT)
    L = builtin_example(policy.backend)
    R = joint_spectrum(L, policy)
    a_line = subspace(L, [[0, 1]], policy, "span{a}")
    b_line = subspace(L, [[1, 0]], policy, "span{b}")
    restricted = sorted({restrict_functional(ch, a_line).coords[0] for ch in R.points}, key=_key)
    sp_a = single_operator_spectrum(L.ops[1], policy)
    expect_restricted = [la.scalar(x, policy.backend) for x in (Fraction(-3, 2), Fraction(1, 2))]
    expect_sp_a = [la.scalar(x, policy.backend) for x in (Fraction(-1, 2), Fraction(1, 2))]
    control = verify_projection(L, b_line, policy, spectrum=R)
    ok = (
        not a_line.is_ideal
        and b_line.is_ideal
        and _close_lists(restricted, expect_restricted)
        and _close_lists(sp_a, expect_sp_a)
        and not _close_lists(restricted, sp_a)
        and control.passed
    )
    witnesses = {
        "restricted_to_a": restricted,
        "spectrum_of_a": sp_a,
        "span_a_is_ideal": a_line.is_ideal,
        "ideal_control": control.witnesses,
    }
    return TheoremReport("nonideal_counterexample", L.fingerprint(), ok, True, witnesses, {"set": SET_TOL})


def _key(z):
    z = complex(z)
    return (z.real, z.imag)


def _close_lists(a, b) -> bool:
    return len(a) == len(b) and all(abs(complex(x) - complex(y)) <= SET_TOL for x, y in zip(sorted(a, key=_key), sorted(b, key=_key)))


# --- batches -------------------------------------------------------------------


def codim_one_ideals(L: LieAlgebraRep, rng: np.random.Generator, policy: RankPolicy) -> list[SubalgebraSpec]:
    """Kernels of characters: one per annihilator basis vector plus one random."""
    if L.n < 2:
        return []
    ann = la.to_float(annihilator(derived_subalgebra(L, policy), policy))
    functionals = [row for row in ann]
    if ann.shape[0] > 1:
        functionals.append((rng.normal(size=ann.shape[0]) + 1j * rng.normal(size=ann.shape[0])) @ ann)
    out = []
    for k, phi in enumerate(functionals):
        rows = la.null_space(phi[None, :], RankPolicy(FLOAT, policy.tol)).T
        out.append(subspace(L, rows, RankPolicy(FLOAT, policy.tol), f"ker{k}"))
    return out


def projection_reports(L, policy, rng, seed=None) -> list[TheoremReport]:
    R = joint_spectrum(L, policy)
    ideals = [derived_subalgebra(L, policy)]
    if policy.backend == FLOAT:
        ideals += codim_one_ideals(L, rng, policy)
    return [verify_projection(L, I, policy, spectrum=R, seed=seed) for I in ideals]


PROPERTIES: dict[str, Callable] = {
    "projection": lambda L, policy, rng, seed: projection_reports(L, policy, rng, seed),
    "nonempty": lambda L, policy, rng, seed: [verify_nonempty(L, policy, seed=seed)],
    "finiteness": lambda L, policy, rng, seed: [verify_finiteness(L, policy, seed=seed)],
    "nilpotent_bound": lambda L, policy, rng, seed: [
        verify_nilpotent_bound(L, policy, seed=seed, require_nilpotent=False)
    ],
    "derived_vanishing": lambda L, policy, rng, seed: [verify_derived_vanishing(L, policy, seed=seed)],
    "derived_point_spectra": lambda L, policy, rng, seed: [verify_derived_point_spectra(L, policy, seed=seed)],
    "zero_spectrum_points": lambda L, policy, rng, seed: [verify_zero_spectrum_points(L, policy, seed=seed)],
    "chain": lambda L, policy, rng, seed: [verify_chain_property(L, policy, seed=seed)],
}
ALL_PROPERTIES = tuple(PROPERTIES) + ("nonideal_counterexample",)


def run_suite(
    instances: Iterable[tuple[LieAlgebraRep, int | None]],
    policy: RankPolicy | None = None,
    properties: Iterable[str] = ALL_PROPERTIES,
) -> list[TheoremReport]:
    """Run the selected checks over ``(rep, seed)`` pairs, in input order.

    ``nonideal_counterexample`` is instance-free and runs once, after the
    batch, when selected and the batch is nonempty.
    """
    props = list(properties)
    unknown = set(props) - set(ALL_PROPERTIES)
    if unknown:
        raise ValueError(f"unknown properties: {sorted(unknown)}")
    reports: list[TheoremReport] = []
    seen_any = False
    for L, seed in instances:
        seen_any = True
        pol = policy or RankPolicy(backend=L.backend)
        for name in props:
            if name == "nonideal_counterexample":
                continue
            rng = np.random.default_rng(seed if seed is not None else 0)
            try:
                reports.extend(PROPERTIES[name](L, pol, rng, seed))
            except LieSpecError as exc:
                reports.append(
                    TheoremReport(name, L.fingerprint(), False, True, {"error": repr(exc)}, {}, seed)
                )
    if seen_any and "nonideal_counterexample" in props:
        reports.append(verify_counterexample_nonideal())
    return reports


def random_batch(specs: Iterable[InstanceSpec], policy: RankPolicy | None = None):
    """``(rep, seed)`` pairs for :func:`run_suite`."""
    for spec in specs:
        yield random_solvable_rep(spec, policy), spec.seed


def summarize(reports: list[TheoremReport]) -> dict:
    out: dict[str, dict] = {}
    for r in reports:
        s = out.setdefault(r.theorem, {"passed": 0, "failed": 0, "not_applicable": 0})
        if not r.applicable:
            s["not_applicable"] += 1
        elif r.passed:
            s["passed"] += 1
        else:
            s["failed"] += 1
    return out

