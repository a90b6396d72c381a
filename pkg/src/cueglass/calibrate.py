"""Iterative per-subject calibration.

Each round: split the acted samples into adapt/holdout, re-seed the
neutral baseline from acted neutral faces, nudge per-label score biases,
run a few gentle gradient fine-tuning steps, then measure per-label
holdout recall.  Labels still under the recall target are requested again
next round; calibration ends when none are deficient or the round budget
runs out.  Adaptation is deliberately gentle so a few rounds cannot wreck
the base model on generic data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import LinearModel, fine_tune, predict, replace_weights
from .synthfeatures import ActedSubject


class InsufficientSamples(Exception):
    pass


REQUEST = "request"
CONVERGED = "converged"
MAX_ROUNDS_REACHED = "max_rounds_reached"


@dataclass(frozen=True)
class CalibrationPolicy:
    recall_target: float = 0.8
    samples_per_request: int = 20
    max_rounds: int = 5
    holdout_fraction: float = 0.25
    bias_rate: float = 0.3
    fine_tune_steps: int = 10
    fine_tune_step_size: float = 0.05
    anchor_strength: float = 2.0   # proximal pull toward the base model

    def validate(self) -> None:
        if not 0.0 < self.recall_target <= 1.0:
            raise ValueError(f"recall_target {self.recall_target}")
        if self.samples_per_request < 2:
            raise ValueError(f"samples_per_request {self.samples_per_request}")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds {self.max_rounds}")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ValueError(f"holdout_fraction {self.holdout_fraction}")


@dataclass(frozen=True)
class CalibrationRound:
    round_index: int
    requested: tuple[int, ...]
    collected: dict[int, int]
    per_label_recall: dict[int, float]


@dataclass(frozen=True)
class RequestDecision:
    status: str                    # REQUEST | CONVERGED | MAX_ROUNDS_REACHED
    labels: tuple[int, ...] = ()


@dataclass
class CalibrationResult:
    status: str
    model: LinearModel
    neutral: np.ndarray
    rounds: list[CalibrationRound] = field(default_factory=list)

    def transcript(self) -> list[dict]:
        out = []
        for r in self.rounds:
            out.append({
                "round": r.round_index,
                "requested": [self.model.labels.name_of(i) for i in r.requested],
                "collected": {self.model.labels.name_of(i): n
                              for i, n in sorted(r.collected.items())},
                "recall": {self.model.labels.name_of(i): round(v, 4)
                           for i, v in sorted(r.per_label_recall.items())},
            })
        return out


def run_round(model: LinearModel, policy: CalibrationPolicy,
              acted: dict[int, np.ndarray], round_index: int, seed: int,
              neutral: np.ndarray | None = None,
              anchor: np.ndarray | None = None
              ) -> tuple[LinearModel, np.ndarray, CalibrationRound]:
    """One adapt/evaluate cycle over this round's acted samples."""
    policy.validate()
    for label, samples in acted.items():
        if len(samples) < 2:
            raise InsufficientSamples(
                f"label {label}: {len(samples)} samples, need >= 2")

    rng = np.random.default_rng((seed, round_index))
    neutral_index = model.labels.neutral_index
    if neutral is None:
        neutral = (model.neutral_seed.copy() if model.neutral_seed is not None
                   else np.zeros(model.dim))

    adapt: dict[int, np.ndarray] = {}
    holdout: dict[int, np.ndarray] = {}
    for label in sorted(acted):
        samples = np.asarray(acted[label], dtype=np.float64)
        order = rng.permutation(len(samples))
        n_hold = max(1, round(policy.holdout_fraction * len(samples)))
        holdout[label] = samples[order[:n_hold]]
        adapt[label] = samples[order[n_hold:]]

    if neutral_index in adapt and len(adapt[neutral_index]):
        neutral = adapt[neutral_index].mean(axis=0)

    x_adapt = np.vstack([adapt[l] - neutral for l in sorted(adapt)])
    y_adapt = np.concatenate([np.full(len(adapt[l]), l) for l in sorted(adapt)])

    # per-label bias recentering: pull each acted label's mean own-score
    # toward the cross-label mean, which undoes score-space offsets
    weights = model.weights.copy()
    mean_scores = {}
    for label in sorted(adapt):
        margins = adapt[label] - neutral
        scores = margins @ weights[label, :-1] + weights[label, -1]
        mean_scores[label] = scores.mean()
    center = np.mean(list(mean_scores.values()))
    for label, s in mean_scores.items():
        weights[label, -1] += policy.bias_rate * (center - s)
    adapted = replace_weights(model, weights)

    adapted = fine_tune(adapted, x_adapt, y_adapt,
                        steps=policy.fine_tune_steps,
                        step=policy.fine_tune_step_size,
                        anchor=anchor if anchor is not None else model.weights,
                        anchor_strength=policy.anchor_strength)

    recall: dict[int, float] = {}
    for label in sorted(holdout):
        hits = sum(predict(adapted, f - neutral).label == label
                   for f in holdout[label])
        recall[label] = hits / len(holdout[label])

    info = CalibrationRound(
        round_index=round_index,
        requested=tuple(sorted(acted)),
        collected={l: len(acted[l]) for l in sorted(acted)},
        per_label_recall=recall)
    return adapted, neutral, info


def next_request(round_info: CalibrationRound,
                 policy: CalibrationPolicy) -> RequestDecision:
    deficient = sorted(
        (label for label, r in round_info.per_label_recall.items()
         if r < policy.recall_target),
        key=lambda label: (round_info.per_label_recall[label], label))
    if not deficient:
        return RequestDecision(CONVERGED)
    if round_info.round_index + 1 == policy.max_rounds:
        return RequestDecision(MAX_ROUNDS_REACHED, tuple(deficient))
    return RequestDecision(REQUEST, tuple(deficient))


def run_calibration(model: LinearModel, policy: CalibrationPolicy,
                    subject: ActedSubject, seed: int = 0) -> CalibrationResult:
    """Drive rounds against a subject until convergence or round budget."""
    policy.validate()
    requested = tuple(range(len(model.labels)))
    neutral: np.ndarray | None = None
    anchor = model.weights.copy()
    rounds: list[CalibrationRound] = []
    status = MAX_ROUNDS_REACHED
    for round_index in range(policy.max_rounds):
        acted = {label: subject.sample(label, policy.samples_per_request)
                 for label in requested}
        model, neutral, info = run_round(model, policy, acted, round_index,
                                         seed, neutral, anchor)
        rounds.append(info)
        decision = next_request(info, policy)
        if decision.status != REQUEST:
            status = decision.status
            break
        requested = decision.labels
    return CalibrationResult(status=status, model=model, neutral=neutral,
                             rounds=rounds)
