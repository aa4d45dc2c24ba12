"""Backpropagated Adaptive Critic experiments on the cart-pole plant."""

from ._core import (
    CartPoleState,
    Config,
    accelerations,
    balancing_force,
    gradcheck,
    induction_term,
    influence_error,
    run_batch,
    run_experiment,
    step,
)

__all__ = [
    "CartPoleState",
    "Config",
    "accelerations",
    "balancing_force",
    "gradcheck",
    "induction_term",
    "influence_error",
    "run_batch",
    "run_experiment",
    "step",
]
