"""Knowledge-dependent local bounds and asymmetry indicators for nonlocal games."""

from .adversary import (
    EveStrategy,
    KnowledgeBudget,
    SimulationReport,
    conditional_min_entropy,
    effective_box,
    evaluate_eve_value,
    min_entropy,
    relative_knowledge,
    simulate,
)
from .asymmetry import CurvePoint, SweepConfig, check_symmetry, delta_one_param, delta_two_param, sweep_curve
from .cli import run_cli
from .errors import BellAsymError, SolverError, ValidationError
from .game_model import GameTable, algebraic_max, builtin_game, load_game, parse_game, serialize_game, transpose_game
from .lhv_core import Box, BoundResult, check_no_signaling, classical_bound, evaluate_box_value
from .oracle import coordinate_ascent_oracle
from .solver import closed_form_full_knowledge, solve_adversarial_bound

__version__ = "0.1.0"
