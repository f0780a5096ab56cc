"""Conewise linear systems: design, simulation and certificates."""

from .cls import ConewiseSystem, count_switches, in_F, simulate, switch_counts, validate
from .errors import ConeCertError
from .kernels import BACKEND
from .qclp import design, design_plant, insulin_plant, rollout_cost
from .stability import PwqCandidate, certify_ges, verify_pwq
from .switch_cert import build_rows, certify, certify_auto, cone_is_trivial, search_N

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConeCertError", "ConewiseSystem", "PwqCandidate", "build_rows", "certify", "certify_auto",
    "certify_ges", "cone_is_trivial", "count_switches", "design", "design_plant", "in_F", "insulin_plant",
    "rollout_cost", "search_N", "simulate", "switch_counts", "validate", "verify_pwq",
]
