"""Adam, Adamax, and RMSprop parameter updates over lists of numpy arrays.

Hyperparameters beyond the learning rate are fixed to the standard published
defaults (beta1 = 0.9, beta2 = 0.999, rho = 0.9, eps = 1e-8). RMSprop is the
plain variant: no momentum, no centering. The eps sits outside the square
root in the Adam/RMSprop denominators.

Each OptimizerState belongs to a single training run; steps mutate the state
buffers and parameters in place and return both, so call sites can treat the
update as state-in/state-out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BETA1 = 0.9
BETA2 = 0.999
RHO = 0.9
EPS = 1e-8

OPTIMIZERS = ("Adam", "Adamax", "RMSprop")


class TrainingError(RuntimeError):
    """Raised on numerically broken training steps (non-finite gradients/losses)."""


@dataclass
class OptimizerState:
    """Moment buffers mirroring the parameter shapes, plus the step counter.

    `v` holds the second-moment average for Adam/RMSprop and the infinity-norm
    buffer for Adamax.
    """

    kind: str
    m: list[np.ndarray] = field(repr=False)
    v: list[np.ndarray] = field(repr=False)
    t: int = 0


def init_state(kind: str, params: list[np.ndarray]) -> OptimizerState:
    if kind not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {kind!r}, expected one of {OPTIMIZERS}")
    zeros = lambda: [np.zeros_like(p) for p in params]
    return OptimizerState(kind=kind, m=zeros(), v=zeros())


def _check_finite(grads: list[np.ndarray], t: int) -> None:
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient at optimizer step {t}")


def adam_step(state, params, grads, lr):
    """m <- b1*m + (1-b1)*g; v <- b2*v + (1-b2)*g^2; bias-corrected update."""
    state.t += 1
    _check_finite(grads, state.t)
    c1 = 1.0 - BETA1**state.t
    c2 = 1.0 - BETA2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= BETA1
        m += (1.0 - BETA1) * g
        v *= BETA2
        v += (1.0 - BETA2) * np.square(g)
        p -= lr * (m / c1) / (np.sqrt(v / c2) + EPS)
    return params, state


def adamax_step(state, params, grads, lr):
    """Infinity-norm Adam variant: u <- max(b2*u, |g|)."""
    state.t += 1
    _check_finite(grads, state.t)
    c1 = 1.0 - BETA1**state.t
    for p, g, m, u in zip(params, grads, state.m, state.v):
        m *= BETA1
        m += (1.0 - BETA1) * g
        np.maximum(BETA2 * u, np.abs(g), out=u)
        p -= (lr / c1) * m / (u + EPS)
    return params, state


def rmsprop_step(state, params, grads, lr):
    """Plain RMSprop: v <- rho*v + (1-rho)*g^2; step g/(sqrt(v)+eps)."""
    state.t += 1
    _check_finite(grads, state.t)
    for p, g, v in zip(params, grads, state.v):
        v *= RHO
        v += (1.0 - RHO) * np.square(g)
        p -= lr * g / (np.sqrt(v) + EPS)
    return params, state


_STEP_FNS = {"Adam": adam_step, "Adamax": adamax_step, "RMSprop": rmsprop_step}


def apply_step(state: OptimizerState, params, grads, lr):
    """Dispatch one update according to state.kind."""
    return _STEP_FNS[state.kind](state, params, grads, lr)
