"""
Gradient blending: branch losses, adaptive weights and the blended loss.

Each evaluation appends the branch losses on the fixed training subset and
on the validation set to the branch ledger. The weight of a branch is

    G = L*_true - mean_W(L_true)
    O = (L*_train - mean_W(L_train)) - G
    w = max(G, eps) / max(O, eps) ** 2

where the references L* are the best smoothed losses seen so far, taken
from the first evaluation (so the first update is uniform) and lowered
after every computation.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy.special import xlogy

from autodiff import ops
from exceptions import InvalidArgumentError
from models.blending import AdaptiveWeight, BlendWeights, BranchLedger, GOMeasures

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from autodiff import Tensor

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-6


# =============================================================================
# Losses
# =============================================================================


def branch_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    """
    Mean cross-entropy -(1/M) sum_m y_m . log p_m of one branch.

    Args:
        probs: (M, C) rows on the probability simplex.
        labels: (M, C) one-hot rows.

    Raises:
        InvalidArgumentError: On shape mismatch or non-finite probabilities.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if probs.shape != labels.shape or probs.ndim != 2 or probs.shape[0] == 0:
        msg = f"branch_loss needs matching (M, C) arrays, got {probs.shape} and {labels.shape}"
        raise InvalidArgumentError(msg)
    if not np.all(np.isfinite(probs)):
        msg = "branch_loss: non-finite probabilities"
        raise InvalidArgumentError(msg)
    return float(-xlogy(labels, probs).sum() / probs.shape[0])


def one_hot(labels: Sequence[int] | np.ndarray, n_classes: int) -> np.ndarray:
    indices = np.asarray(labels, dtype=np.int64)
    encoded = np.zeros((indices.size, n_classes))
    encoded[np.arange(indices.size), indices] = 1.0
    return encoded


def blended_loss(losses: Mapping[str, Tensor], weights: BlendWeights) -> Tensor:
    """
    Total training loss sum_k w_k L_k.

    Branches with zero weight are left out of the graph; their gradient
    contribution is zero either way.
    """
    terms = [
        ops.scale(loss, weights.of(branch))
        for branch, loss in losses.items()
        if weights.of(branch) > 0.0
    ]
    if not terms:
        msg = f"no branch of {sorted(losses)} carries weight in {weights.weights}"
        raise InvalidArgumentError(msg)
    total = terms[0]
    for term in terms[1:]:
        total = ops.add(total, term)
    return total


# =============================================================================
# Adaptive weights
# =============================================================================


def smooth(history: Sequence[float], n: int | None = None, window: int = 5) -> float:
    """Mean of the last min(window, n) entries of ``history[:n]``."""
    n = len(history) if n is None else n
    if n < 1 or n > len(history):
        msg = f"smooth: n={n} outside 1..{len(history)}"
        raise InvalidArgumentError(msg)
    if window < 1:
        msg = f"smooth: window must be >= 1, got {window}"
        raise InvalidArgumentError(msg)
    recent = history[max(0, n - window) : n]
    return math.fsum(recent) / len(recent)


def adaptive_weight(
    ledger: BranchLedger,
    n: int | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> tuple[AdaptiveWeight, BranchLedger]:
    """
    Unnormalized weight of one branch at evaluation ``n`` and the ledger
    with its references lowered to the current smoothed losses.

    On the first computation the references start at the smoothed values,
    so G = 0 and the result is flagged degenerate.
    """
    n = ledger.evaluations if n is None else n
    smoothed_train = smooth(ledger.train_losses, n, ledger.window)
    smoothed_true = smooth(ledger.true_losses, n, ledger.window)

    degenerate = not ledger.initialized
    best_train = smoothed_train if ledger.best_train is None else ledger.best_train
    best_true = smoothed_true if ledger.best_true is None else ledger.best_true

    raw_g = best_true - smoothed_true
    raw_o = (best_train - smoothed_train) - raw_g
    g = max(raw_g, epsilon)
    o = max(raw_o, epsilon)
    weight = g / (o * o)

    result = AdaptiveWeight(
        branch=ledger.branch,
        weight=weight,
        measures=GOMeasures(
            generalization=g, overfitting=o, raw_generalization=raw_g, raw_overfitting=raw_o
        ),
        smoothed_train=smoothed_train,
        smoothed_true=smoothed_true,
        degenerate=degenerate,
    )
    updated = ledger.model_copy(
        update={
            "best_train": min(best_train, smoothed_train),
            "best_true": min(best_true, smoothed_true),
        }
    )
    return result, updated


def normalize(raw: Mapping[str, float]) -> BlendWeights:
    """
    Divide by Z = sum of the weights; an all-zero input falls back to uniform.

    Raises:
        InvalidArgumentError: On negative or non-finite weights.
    """
    if not raw:
        msg = "normalize needs at least one branch"
        raise InvalidArgumentError(msg)
    if any(not math.isfinite(w) or w < 0.0 for w in raw.values()):
        msg = f"weights must be finite and non-negative, got {dict(raw)}"
        raise InvalidArgumentError(msg)
    total = math.fsum(raw.values())
    if total == 0.0:
        logger.warning("All branch weights are zero; using uniform weights")
        return BlendWeights.uniform(list(raw))
    return BlendWeights(weights={k: w / total for k, w in raw.items()}, normalizer=total)


# =============================================================================
# Stateful blender
# =============================================================================


class GradientBlender:
    """
    Ledger bookkeeping across a training run.

    With ``adaptive=False`` the ledgers and measures are still tracked (for
    the weight log) but the weights stay at ``fixed``.
    """

    def __init__(
        self,
        branches: Sequence[str],
        *,
        window: int = 5,
        epsilon: float = DEFAULT_EPSILON,
        adaptive: bool = True,
        fixed: BlendWeights | None = None,
    ) -> None:
        if not branches:
            msg = "blender needs at least one branch"
            raise InvalidArgumentError(msg)
        self.branches = tuple(branches)
        self.epsilon = epsilon
        self.adaptive = adaptive
        self.ledgers = {b: BranchLedger(branch=b, window=window) for b in self.branches}
        self.weights = fixed if fixed is not None else BlendWeights.uniform(self.branches)
        self.last_update: list[AdaptiveWeight] = []

    def update(
        self,
        train_losses: Mapping[str, float],
        true_losses: Mapping[str, float],
    ) -> BlendWeights:
        """Record one evaluation and recompute the weights."""
        results: list[AdaptiveWeight] = []
        for branch in self.branches:
            ledger = self.ledgers[branch].appended(train_losses[branch], true_losses[branch])
            result, self.ledgers[branch] = adaptive_weight(ledger, epsilon=self.epsilon)
            results.append(result)
        self.last_update = results

        if self.adaptive:
            if any(r.degenerate for r in results):
                self.weights = BlendWeights.uniform(self.branches)
            else:
                self.weights = normalize({r.branch: r.weight for r in results})
        for r in results:
            logger.debug(
                "Branch %s: G=%.6g O=%.6g w=%.6g normalized=%.4f",
                r.branch,
                r.measures.generalization,
                r.measures.overfitting,
                r.weight,
                self.weights.of(r.branch),
            )
        return self.weights

    def state(self) -> dict[str, Any]:
        return {
            "weights": self.weights.model_dump(),
            "ledgers": [ledger.model_dump() for ledger in self.ledgers.values()],
        }

    def restore(self, state: dict[str, Any]) -> None:
        self.weights = BlendWeights.model_validate(state["weights"])
        ledgers = [BranchLedger.model_validate(d) for d in state["ledgers"]]
        self.ledgers = {ledger.branch: ledger for ledger in ledgers}
