"""Synthetic feature-space worlds for calibration subjects and benchmarks.

A world is a set of per-label prototype vectors plus Gaussian sample
noise.  Subjects draw raw features as offset + prototype(label) + noise,
optionally with a label permutation or inflated noise.  The classifier
convention everywhere is neutral-relative: models are trained on features
with the population's neutral prototype subtracted, and the runtime
neutral estimate is expected to absorb any per-subject constant offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import (LinearModel, NeutralState, predict, train,
                       update_neutral)
from .cue import EmotionEstimate
from .protocol import LabelSet


@dataclass(frozen=True)
class FeatureWorld:
    labels: LabelSet
    prototypes: np.ndarray      # (n_labels, dim), raw space
    noise: float

    @property
    def dim(self) -> int:
        return self.prototypes.shape[1]

    @property
    def neutral_prototype(self) -> np.ndarray:
        return self.prototypes[self.labels.neutral_index]


def make_world(labels: LabelSet | None = None, dim: int = 32,
               separation: float = 6.0, noise: float = 1.0,
               seed: int = 0) -> FeatureWorld:
    labels = labels or LabelSet.default()
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(len(labels), dim))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    return FeatureWorld(labels=labels, prototypes=separation * raw,
                        noise=noise)


class ActedSubject:
    """Draws acted-expression samples in raw feature space.

    offset_scale shifts every sample by a fixed random direction (a
    different resting face), noise_scale inflates the sample noise, and
    permute relabels expressions adversarially.
    """

    def __init__(self, world: FeatureWorld, seed: int = 0,
                 offset_scale: float = 0.0, noise_scale: float = 1.0,
                 permute: bool = False):
        self.world = world
        self.rng = np.random.default_rng(seed)
        direction = self.rng.normal(size=world.dim)
        direction /= np.linalg.norm(direction)
        self.offset = offset_scale * direction
        self.noise_scale = noise_scale
        if permute:
            # derangement of the non-neutral labels
            idx = [i for i in range(len(world.labels))
                   if i != world.labels.neutral_index]
            rolled = idx[1:] + idx[:1]
            table = dict(zip(idx, rolled))
            table[world.labels.neutral_index] = world.labels.neutral_index
            self.permutation = table
        else:
            self.permutation = {i: i for i in range(len(world.labels))}

    def sample(self, label: int, n: int) -> np.ndarray:
        proto = self.world.prototypes[self.permutation[label]]
        noise = self.rng.normal(size=(n, self.world.dim))
        return self.offset + proto + self.world.noise * self.noise_scale * noise


def make_subject(world: FeatureWorld, kind: str, seed: int = 0) -> ActedSubject:
    """kind: ideal | offset | noisy | permuted (the sg-calibrate spellings)."""
    if kind == "ideal":
        return ActedSubject(world, seed)
    if kind == "offset":
        return ActedSubject(world, seed, offset_scale=3.5)
    if kind == "noisy":
        return ActedSubject(world, seed, noise_scale=2.5)
    if kind == "permuted":
        return ActedSubject(world, seed, permute=True)
    raise ValueError(f"subject kind {kind!r}")


def training_set(world: FeatureWorld, per_label: int, seed: int = 0
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Neutral-relative training features for an offset-free population."""
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for li in range(len(world.labels)):
        base = world.prototypes[li] - world.neutral_prototype
        xs.append(base + world.noise * rng.normal(size=(per_label, world.dim)))
        ys.append(np.full(per_label, li))
    return np.vstack(xs), np.concatenate(ys)


def train_world_model(world: FeatureWorld, kind: str = "logistic",
                      per_label: int = 40, seed: int = 0) -> LinearModel:
    x, y = training_set(world, per_label, seed)
    return train(kind, x, y, world.labels, iterations=250, step=1.0,
                 l2=1e-3, seed=seed, neutral_seed=world.neutral_prototype)


def neutral_benchmark(seed: int, offset_scale: float = 12.0,
                      neutral_frames: int = 300, eval_per_label: int = 12
                      ) -> tuple[float, float]:
    """Accuracy on a constant-offset subject with a runtime-converged
    neutral estimate vs the static population baseline.  Both score the
    same drawn samples.  Returns (with_runtime, without)."""
    world = make_world(seed=seed)
    model = train_world_model(world, seed=seed)
    subject = ActedSubject(world, seed=seed + 1, offset_scale=offset_scale)
    neutral_index = world.labels.neutral_index
    static = NeutralState.initial(world.dim, seed_vector=model.neutral_seed)

    # converge the gated EMA on the subject's resting face
    neutral = static
    for i, feats in enumerate(subject.sample(neutral_index, neutral_frames)):
        est = predict(model, feats, neutral, sequence=i)
        neutral = update_neutral(neutral, feats, est, neutral_index)

    eval_sets = {li: subject.sample(li, eval_per_label)
                 for li in range(len(world.labels))}

    def accuracy(state: NeutralState) -> float:
        hits = total = 0
        for li, batch in eval_sets.items():
            for feats in batch:
                hits += predict(model, feats, state).label == li
                total += 1
        return hits / total

    return accuracy(neutral), accuracy(static)
