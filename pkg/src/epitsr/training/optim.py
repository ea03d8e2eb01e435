from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from ..arguments import TrainConfig
from ..errors import ShapeMismatchError


@dataclass
class AdamState:
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    t: int = 0

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], t=0)


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float,
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> Tuple[List[np.ndarray], AdamState]:
    r"""
    One bias-corrected Adam update. Returns new parameter arrays and a new state;
    the inputs are left untouched.
    """
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise ShapeMismatchError(
            f"Adam got {len(params)} parameters, {len(grads)} gradients and {len(state.m)} moment buffers."
        )
    beta1, beta2 = betas
    t = state.t + 1
    new_params, new_m, new_v = [], [], []
    for index, (p, g, m, v) in enumerate(zip(params, grads, state.m, state.v)):
        if p.shape != g.shape or p.shape != m.shape:
            raise ShapeMismatchError(f"Adam buffer {index}: parameter {p.shape}, gradient {g.shape}, moment {m.shape}.")
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        new_params.append((p - lr * m_hat / (np.sqrt(v_hat) + eps)).astype(p.dtype))
        new_m.append(m.astype(p.dtype))
        new_v.append(v.astype(p.dtype))
    return new_params, AdamState(m=new_m, v=new_v, t=t)


def lr_at(index: int, cfg: TrainConfig) -> float:
    r"""`lr0` halved every `lr_halve_every` epochs (or steps, per `schedule_unit`)."""
    return cfg.lr0 * 0.5 ** (index // cfg.lr_halve_every)
