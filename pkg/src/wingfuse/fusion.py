"""The trainable refinement head: one hidden layer, ReLU, and a skip.

Row convention: for a batch ``X`` of shape B x F,

    L = X + relu(X @ w1 + b1) @ w2 + b2

so with all parameters zero the head is the identity map. The backward
pass returns exact gradients of ``sum(grad_l * L)`` for every parameter
and for ``X`` itself, using subgradient 0 for ReLU at exactly 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimMismatchError, InvalidParameterError


@dataclass(frozen=True)
class FusionHeadParams:
    """Weights of the head. Shapes: w1 F x H, b1 H, w2 H x F, b2 F."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        w1 = np.asarray(self.w1, dtype=np.float64)
        b1 = np.asarray(self.b1, dtype=np.float64)
        w2 = np.asarray(self.w2, dtype=np.float64)
        b2 = np.asarray(self.b2, dtype=np.float64)
        f, h = w1.shape
        if b1.shape != (h,) or w2.shape != (h, f) or b2.shape != (f,):
            raise DimMismatchError(
                f"inconsistent parameter shapes: w1 {w1.shape}, b1 {b1.shape}, "
                f"w2 {w2.shape}, b2 {b2.shape}"
            )
        for name, arr in (("w1", w1), ("b1", b1), ("w2", w2), ("b2", b2)):
            if not np.all(np.isfinite(arr)):
                raise InvalidParameterError(f"{name} contains non-finite values")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "b2", b2)

    @property
    def dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    @property
    def count(self) -> int:
        return self.w1.size + self.b1.size + self.w2.size + self.b2.size

    def copy(self) -> "FusionHeadParams":
        return FusionHeadParams(
            self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy()
        )


@dataclass(frozen=True)
class FusionGrads:
    """Parameter gradients plus the gradient w.r.t. the head input."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    grad_input: np.ndarray


def init_params(dim: int, hidden: int, seed: int) -> FusionHeadParams:
    """Seeded init: weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero."""
    if dim < 1 or hidden < 1:
        raise InvalidParameterError(f"dim and hidden must be >= 1, got {dim}, {hidden}")
    rng = np.random.default_rng(seed)
    bound1 = 1.0 / np.sqrt(dim)
    bound2 = 1.0 / np.sqrt(hidden)
    return FusionHeadParams(
        w1=rng.uniform(-bound1, bound1, size=(dim, hidden)),
        b1=np.zeros(hidden),
        w2=rng.uniform(-bound2, bound2, size=(hidden, dim)),
        b2=np.zeros(dim),
    )


def forward(params: FusionHeadParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.dim:
        raise DimMismatchError(
            f"input shape {x.shape} incompatible with head dim {params.dim}"
        )
    hidden = np.maximum(x @ params.w1 + params.b1, 0.0)
    return x + hidden @ params.w2 + params.b2


def backward(params: FusionHeadParams, x: np.ndarray, grad_l: np.ndarray) -> FusionGrads:
    """Exact gradients of ``sum(grad_l * forward(params, x))``."""
    x = np.asarray(x, dtype=np.float64)
    grad_l = np.asarray(grad_l, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.dim:
        raise DimMismatchError(
            f"input shape {x.shape} incompatible with head dim {params.dim}"
        )
    if grad_l.shape != x.shape:
        raise DimMismatchError(
            f"grad shape {grad_l.shape} does not match input shape {x.shape}"
        )
    pre = x @ params.w1 + params.b1
    hidden = np.maximum(pre, 0.0)
    grad_hidden = grad_l @ params.w2.T
    grad_pre = np.where(pre > 0.0, grad_hidden, 0.0)
    return FusionGrads(
        w1=x.T @ grad_pre,
        b1=grad_pre.sum(axis=0),
        w2=hidden.T @ grad_l,
        b2=grad_l.sum(axis=0),
        grad_input=grad_l + grad_pre @ params.w1.T,
    )


# --- model file --------------------------------------------------------------

def save_model(
    params: FusionHeadParams,
    path: str | Path,
    *,
    alpha: float,
    tau: float,
    train_class_catalog: tuple[str, ...] | list[str],
) -> None:
    """JSON model file with full-precision decimal floats."""
    doc = {
        "dim": params.dim,
        "hidden": params.hidden,
        "w1": params.w1.tolist(),
        "b1": params.b1.tolist(),
        "w2": params.w2.tolist(),
        "b2": params.b2.tolist(),
        "alpha": alpha,
        "tau": tau,
        "train_class_catalog": list(train_class_catalog),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> tuple[FusionHeadParams, dict]:
    """Returns the parameters and a dict with alpha, tau, and the catalog."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    params = FusionHeadParams(
        w1=np.asarray(doc["w1"], dtype=np.float64),
        b1=np.asarray(doc["b1"], dtype=np.float64),
        w2=np.asarray(doc["w2"], dtype=np.float64),
        b2=np.asarray(doc["b2"], dtype=np.float64),
    )
    if params.dim != doc["dim"] or params.hidden != doc["hidden"]:
        raise InvalidParameterError(
            f"{path}: declared dims ({doc['dim']}, {doc['hidden']}) do not match "
            f"stored arrays ({params.dim}, {params.hidden})"
        )
    meta = {
        "alpha": float(doc["alpha"]),
        "tau": float(doc["tau"]),
        "train_class_catalog": tuple(doc.get("train_class_catalog", ())),
    }
    return params, meta
