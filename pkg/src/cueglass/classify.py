"""Linear expression classifiers and the runtime neutral-face baseline.

Two trainable model kinds share one weight layout (one row per label, bias
last): multinomial logistic regression fit by full-batch gradient descent,
and one-vs-rest linear SVMs fit by full-batch subgradient descent on the
hinge loss.  Prediction always happens on neutral-subtracted features, and
both kinds report softmax-normalized per-label confidences.

The neutral baseline is a gated exponential moving average: it only moves
on frames the model itself called neutral with enough confidence, so it
converges to the wearer's resting face without supervision.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .cue import EmotionEstimate, Rect
from .features import HogParams
from .protocol import LabelSet

MODEL_FORMAT_VERSION = 1


class DimensionMismatch(Exception):
    pass


class DegenerateDataset(Exception):
    pass


class UnknownModelKind(Exception):
    pass


@dataclass
class LinearModel:
    kind: str                      # "logistic" | "svm"
    labels: LabelSet
    weights: np.ndarray            # (n_labels, dim + 1), bias last column
    hog: HogParams = field(default_factory=HogParams)
    neutral_seed: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.weights.shape[1] - 1

    def validate(self) -> None:
        if self.kind not in ("logistic", "svm"):
            raise UnknownModelKind(self.kind)
        if self.weights.shape[0] != len(self.labels):
            raise DimensionMismatch(
                f"{self.weights.shape[0]} rows vs {len(self.labels)} labels")
        if self.neutral_seed is not None and len(self.neutral_seed) != self.dim:
            raise DimensionMismatch("neutral_seed length")


def softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - np.max(scores, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


@dataclass(frozen=True)
class NeutralState:
    estimate: np.ndarray
    samples: int = 0
    learning_rate: float = 0.05
    confidence_gate: float = 0.6

    @classmethod
    def initial(cls, dim: int, learning_rate: float = 0.05,
                confidence_gate: float = 0.6,
                seed_vector: np.ndarray | None = None) -> "NeutralState":
        if not 0.0 < learning_rate <= 1.0:
            raise ValueError(f"learning_rate {learning_rate}")
        if not 0.0 <= confidence_gate <= 1.0:
            raise ValueError(f"confidence_gate {confidence_gate}")
        est = (np.zeros(dim) if seed_vector is None
               else np.asarray(seed_vector, dtype=np.float64).copy())
        if len(est) != dim:
            raise DimensionMismatch("seed vector length")
        return cls(estimate=est, learning_rate=learning_rate,
                   confidence_gate=confidence_gate)


def predict(model: LinearModel, features: np.ndarray,
            neutral: NeutralState | None = None, sequence: int = 0,
            timestamp_us: int = 0, face: Rect | None = None) -> EmotionEstimate:
    """Score neutral-subtracted features; ties go to the lowest label index."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (model.dim,):
        raise DimensionMismatch(f"{features.shape} vs dim {model.dim}")
    x = features if neutral is None else features - neutral.estimate
    margins = model.weights[:, :-1] @ x + model.weights[:, -1]
    probs = softmax(margins)
    label = int(np.argmax(probs))          # argmax takes the first maximum
    return EmotionEstimate(sequence=sequence, timestamp_us=timestamp_us,
                           face=face, label=label,
                           confidence=float(probs[label]),
                           scores=tuple(float(p) for p in probs))


def update_neutral(neutral: NeutralState, features: np.ndarray,
                   estimate: EmotionEstimate,
                   neutral_index: int) -> NeutralState:
    """Gated EMA: only neutral-labelled, confident frames move the baseline."""
    if estimate.label != neutral_index or \
            estimate.confidence < neutral.confidence_gate:
        return neutral
    features = np.asarray(features, dtype=np.float64)
    if features.shape != neutral.estimate.shape:
        raise DimensionMismatch(str(features.shape))
    lr = neutral.learning_rate
    est = (1.0 - lr) * neutral.estimate + lr * features
    return replace(neutral, estimate=est, samples=neutral.samples + 1)


# --- training ---------------------------------------------------------------

def _canonical_order(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # content-addressed ordering: permuting the input rows cannot change
    # the gradient sums, so training is bit-reproducible
    digests = [hashlib.sha1(row.tobytes()).hexdigest() for row in x]
    return np.lexsort((digests, y))


def logistic_loss(weights: np.ndarray, x: np.ndarray, y: np.ndarray,
                  l2: float) -> float:
    scores = x @ weights[:, :-1].T + weights[:, -1]
    z = scores - scores.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    nll = -log_probs[np.arange(len(y)), y].mean()
    return nll + 0.5 * l2 * np.sum(weights[:, :-1] ** 2)


def logistic_gradient(weights: np.ndarray, x: np.ndarray, y: np.ndarray,
                      l2: float) -> np.ndarray:
    probs = softmax(x @ weights[:, :-1].T + weights[:, -1])
    probs[np.arange(len(y)), y] -= 1.0
    probs /= len(y)
    grad = np.empty_like(weights)
    grad[:, :-1] = probs.T @ x + l2 * weights[:, :-1]
    grad[:, -1] = probs.sum(axis=0)
    return grad


def _hinge_subgradient(weights: np.ndarray, x: np.ndarray, y: np.ndarray,
                       l2: float) -> np.ndarray:
    # one-vs-rest: row c sees targets +1 for class c, -1 otherwise
    targets = np.where(y[None, :] == np.arange(len(weights))[:, None], 1.0, -1.0)
    margins = targets * (weights[:, :-1] @ x.T + weights[:, -1:])
    active = (margins < 1.0).astype(np.float64)
    coef = -(targets * active) / x.shape[0]
    grad = np.empty_like(weights)
    grad[:, :-1] = coef @ x + l2 * weights[:, :-1]
    grad[:, -1] = coef.sum(axis=1)
    return grad


def train(kind: str, x: np.ndarray, y: np.ndarray, labels: LabelSet,
          hog_params: HogParams | None = None, iterations: int = 300,
          step: float = 0.5, l2: float = 1e-3, seed: int = 0,
          neutral_seed: np.ndarray | None = None) -> LinearModel:
    """Full-batch descent from zero weights; deterministic for a given seed
    and dataset regardless of sample order."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or len(x) != len(y):
        raise DegenerateDataset(f"x {x.shape} y {y.shape}")
    present = np.unique(y)
    if len(present) < 2:
        raise DegenerateDataset("fewer than two classes")
    if present.min() < 0 or present.max() >= len(labels):
        raise DegenerateDataset("label outside label set")
    order = _canonical_order(x, y)
    x, y = x[order], y[order]

    weights = np.zeros((len(labels), x.shape[1] + 1))
    if kind == "logistic":
        for _ in range(iterations):
            weights -= step * logistic_gradient(weights, x, y, l2)
    elif kind == "svm":
        for t in range(iterations):
            eta = step / (1.0 + 0.01 * t)
            weights -= eta * _hinge_subgradient(weights, x, y, l2)
    else:
        raise UnknownModelKind(kind)
    model = LinearModel(kind=kind, labels=labels, weights=weights,
                        hog=hog_params or HogParams(),
                        neutral_seed=None if neutral_seed is None
                        else np.asarray(neutral_seed, dtype=np.float64))
    model.validate()
    return model


def fine_tune(model: LinearModel, x: np.ndarray, y: np.ndarray,
              steps: int = 10, step: float = 0.05, l2: float = 1e-3,
              anchor: np.ndarray | None = None,
              anchor_strength: float = 0.0) -> LinearModel:
    """A few gentle softmax-CE gradient steps from the current weights.

    With an anchor, each step also pulls toward the anchor weights
    (proximal term), which caps how far adaptation can wander from the
    base model no matter how adversarial the samples are.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    order = _canonical_order(x, y)
    x, y = x[order], y[order]
    weights = model.weights.copy()
    for _ in range(steps):
        grad = logistic_gradient(weights, x, y, l2)
        if anchor is not None and anchor_strength > 0.0:
            grad = grad + anchor_strength * (weights - anchor)
        weights -= step * grad
    return replace_weights(model, weights)


def replace_weights(model: LinearModel, weights: np.ndarray) -> LinearModel:
    return LinearModel(kind=model.kind, labels=model.labels, weights=weights,
                       hog=model.hog, neutral_seed=model.neutral_seed)


# --- model file -------------------------------------------------------------

def save_model(model: LinearModel, path: str | Path) -> None:
    model.validate()
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "labels": list(model.labels.labels),
        "neutral_index": model.labels.neutral_index,
        "hog": {"window": model.hog.window, "cell": model.hog.cell,
                "block": model.hog.block, "bins": model.hog.bins,
                "clip": model.hog.clip},
        "weights": [[float(v) for v in row] for row in model.weights],
        "neutral_seed": (None if model.neutral_seed is None
                         else [float(v) for v in model.neutral_seed]),
    }
    Path(path).write_text(json.dumps(doc))


def load_model(path: str | Path) -> LinearModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise UnknownModelKind(
            f"model format {doc.get('format_version')!r}")
    labels = LabelSet(labels=tuple(doc["labels"]),
                      neutral_index=int(doc["neutral_index"]))
    h = doc["hog"]
    model = LinearModel(
        kind=doc["kind"], labels=labels,
        weights=np.asarray(doc["weights"], dtype=np.float64),
        hog=HogParams(window=h["window"], cell=h["cell"], block=h["block"],
                      bins=h["bins"], clip=h["clip"]),
        neutral_seed=(None if doc.get("neutral_seed") is None
                      else np.asarray(doc["neutral_seed"], dtype=np.float64)))
    model.validate()
    return model


def load_dataset(path: str | Path, labels: LabelSet
                 ) -> tuple[np.ndarray, np.ndarray]:
    """JSON Lines, one {"label": name-or-index, "features": [...]} per line."""
    xs, ys = [], []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        row = json.loads(line)
        label = row["label"]
        ys.append(labels.index_of(label) if isinstance(label, str) else int(label))
        xs.append(row["features"])
    if not xs:
        raise DegenerateDataset(f"no rows in {path}")
    return np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.int64)
