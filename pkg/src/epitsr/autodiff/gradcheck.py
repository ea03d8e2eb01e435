from dataclasses import asdict, dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from .tensor import Tape, Tensor, backward, record_kinks


# Gradients smaller than this are compared in absolute terms (rtol * floor).
REL_FLOOR = 1e-5

# Step divisors tried in turn while a perturbation still flips a branch.
STEP_DIVISORS = (1.0, 10.0, 100.0, 1000.0)


@dataclass
class GradCheckResult:
    name: str
    entries: int
    skipped: int
    max_rel_err: float
    max_abs_err: float
    rtol: float

    @property
    def status(self) -> str:
        if self.entries == 0:
            return "unchecked"
        return "pass" if self.max_rel_err <= self.rtol else "fail"

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = REL_FLOOR) -> np.ndarray:
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def _evaluate(loss_fn: Callable[[], Tensor]) -> Tuple[float, List[bytes]]:
    with record_kinks() as kinks:
        loss = loss_fn()
    return float(loss.data), list(kinks)


def central_difference(
    loss_fn: Callable[[], Tensor],
    tensor: Tensor,
    position: Tuple[int, ...],
    h: float,
    reference_kinks: Optional[List[bytes]] = None,
) -> Tuple[float, bool]:
    r"""
    Central difference of `loss_fn` along one entry of `tensor`.

    The second value is False when the perturbation flips the branch of any
    piecewise op (LeakyReLU gate, L1 sign) relative to `reference_kinks`.
    """
    original = tensor.data[position]
    try:
        tensor.data[position] = original + h
        plus, plus_kinks = _evaluate(loss_fn)
        tensor.data[position] = original - h
        minus, minus_kinks = _evaluate(loss_fn)
    finally:
        tensor.data[position] = original
    smooth = reference_kinks is None or (plus_kinks == reference_kinks and minus_kinks == reference_kinks)
    return (plus - minus) / (2.0 * h), smooth


def smooth_difference(
    loss_fn: Callable[[], Tensor],
    tensor: Tensor,
    position: Tuple[int, ...],
    h: float,
    reference_kinks: List[bytes],
) -> Optional[float]:
    r"""Central difference at the largest step of `h / STEP_DIVISORS` that flips no branch, else None."""
    for divisor in STEP_DIVISORS:
        numeric, smooth = central_difference(loss_fn, tensor, position, h / divisor, reference_kinks)
        if smooth:
            return numeric
    return None


def check_gradients(
    name: str,
    loss_fn: Callable[[], Tensor],
    params: Sequence[Tuple[str, Tensor]],
    h: float = 1e-5,
    rtol: float = 1e-4,
    max_entries: Optional[int] = None,
    seed: int = 0,
) -> List[GradCheckResult]:
    r"""
    Compare reverse-mode gradients of `loss_fn` with central differences.

    `loss_fn` must rebuild its graph from the tensors in `params`, which are perturbed
    in place and restored. Run it under `precision(np.float64)`.

    A perturbation that moves any LeakyReLU gate or L1 sign is retried with steps
    down to `h / 1000`. With `max_entries`, entries are visited in a seeded random
    order until that many have been compared, so a kinked entry is replaced by
    another one rather than dropped. A tensor with no comparable entry is reported
    with status `unchecked`.
    """
    for param_name, tensor in params:
        if tensor.dtype != np.float64:
            logger.warning(f"Gradient check `{name}` runs on {tensor.dtype} parameter `{param_name}`; use float64.")
    with Tape() as tape:
        with record_kinks() as base_kinks:
            loss = loss_fn()
    grads = backward(tape, loss)
    base_kinks = list(base_kinks)

    rng = np.random.default_rng(seed)
    results = []
    for param_name, tensor in params:
        analytic = grads[tensor]
        wanted = min(max_entries, tensor.size) if max_entries else tensor.size
        candidates = rng.permutation(tensor.size) if wanted < tensor.size else np.arange(tensor.size)
        rel_errs, abs_errs, skipped = [], [], 0
        for index in candidates:
            if len(rel_errs) == wanted:
                break
            position = np.unravel_index(int(index), tensor.shape)
            numeric = smooth_difference(loss_fn, tensor, position, h, base_kinks)
            if numeric is None:
                skipped += 1
                continue
            rel_errs.append(float(relative_error(analytic[position], numeric)))
            abs_errs.append(abs(float(analytic[position]) - numeric))
        result = GradCheckResult(
            name=f"{name}:{param_name}",
            entries=len(rel_errs),
            skipped=skipped,
            max_rel_err=max(rel_errs, default=float("inf")),
            max_abs_err=max(abs_errs, default=float("inf")),
            rtol=rtol,
        )
        if result.status == "unchecked":
            logger.error(f"`{result.name}`: all {skipped} visited entries cross a kink at every step size.")
        elif skipped:
            logger.debug(f"`{result.name}`: {skipped} entries skipped at kinks, {result.entries} compared.")
        results.append(result)
    return results


def results_frame(results: Sequence[GradCheckResult]) -> pd.DataFrame:
    rows = [{**asdict(result), "status": result.status, "passed": result.passed} for result in results]
    return pd.DataFrame(
        rows, columns=["name", "entries", "skipped", "max_rel_err", "max_abs_err", "rtol", "status", "passed"]
    )
