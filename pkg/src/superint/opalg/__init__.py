"""Operator algebra: differential operators, the a-ladder and W_k."""

from .diffop import DiffOp, L_op, a0_op, apply, commutator, compose_ops
from .ladder import (build_a, build_aij, build_aijk, build_W, invert_ad_L, lemma4_check,
                     power_commutator_check, printed_a12, printed_a21, verify_a)

__all__ = ["DiffOp", "L_op", "a0_op", "apply", "commutator", "compose_ops", "build_a",
           "build_aij", "build_aijk", "build_W", "invert_ad_L", "lemma4_check",
           "power_commutator_check", "printed_a12", "printed_a21", "verify_a"]
