"""Joint spectra of solvable matrix Lie algebras via twisted homology."""

from __future__ import annotations

from .errors import LieSpecError
from .homology_engine import BettiVector, betti, build_complex, is_exact, koszul_complex
from .lie_structure import (
    Character,
    LieAlgebraRep,
    OperatorFamily,
    SubalgebraSpec,
    build_rep,
    derived_subalgebra,
    is_nilpotent,
    is_solvable,
    make_character,
    subspace,
)
from .linalg_core import EXACT, FLOAT, GaussianRational, RankPolicy
from .spectrum import (
    SpectrumResult,
    candidate_characters,
    check_character,
    joint_spectrum,
    project_spectrum,
    single_operator_spectrum,
    taylor_spectrum,
)

__version__ = "0.1.0"
