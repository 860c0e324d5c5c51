"""First- and second-order predictors for distribution-labeled data.

Both predictors share a trunk (linear, or one ReLU hidden layer) and
differ in the output map: the first-order model emits a softmax
distribution over classes, the second-order model emits Dirichlet
concentrations ``softplus(raw) + 1`` so that every concentration exceeds
1 and the density mode stays interior.

Training is plain mini-batch gradient descent with a fixed learning
rate, fully deterministic given (seed, data order, config).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, expit, gammaln

from .errors import DimensionMismatch, NonFiniteLoss
from .kernels import CLAMP
from .simplex import DirichletParams, SimplexPoint, make_point


@dataclass(frozen=True)
class LabeledExample:
    """A feature vector paired with a categorical label distribution."""

    features: np.ndarray
    label_dist: SimplexPoint

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        if feats.ndim != 1:
            raise DimensionMismatch(f"features must be a 1-d vector, got shape {feats.shape}")
        object.__setattr__(self, "features", feats)
        if not isinstance(self.label_dist, SimplexPoint):
            object.__setattr__(self, "label_dist", make_point(self.label_dist))


def stack_examples(data: list[LabeledExample]) -> tuple[np.ndarray, np.ndarray]:
    """Stack a dataset into an (N, D) feature matrix and (N, K) label matrix."""
    if not data:
        raise DimensionMismatch("empty dataset")
    dims = {ex.features.size for ex in data}
    ks = {ex.label_dist.k for ex in data}
    if len(dims) != 1 or len(ks) != 1:
        raise DimensionMismatch(f"inconsistent dimensions: D in {dims}, K in {ks}")
    x = np.ascontiguousarray([ex.features for ex in data])
    labels = np.ascontiguousarray([ex.label_dist.probs for ex in data])
    return x, labels


def examples_from_arrays(x: np.ndarray, labels: np.ndarray) -> list[LabeledExample]:
    return [LabeledExample(xi, make_point(li)) for xi, li in zip(x, labels)]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 500
    batch_size: int = 64
    hidden_width: int = 0
    seed: int = 0
    l2: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.hidden_width < 0:
            raise ValueError("hidden_width must be >= 0")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


class _TrunkModel:
    """Shared parameter container and forward pass for both predictors."""

    #: parameter names in serialization order ("w", "b") or ("w1", "b1", "w2", "b2")
    order = "base"

    def __init__(self, d: int, k: int, hidden_width: int, params: dict[str, np.ndarray]):
        self.d = d
        self.k = k
        self.hidden_width = hidden_width
        self.params = params
        self.loss_history: np.ndarray | None = None

    @classmethod
    def initialize(cls, d: int, k: int, hidden_width: int, seed: int):
        rng = np.random.default_rng(seed)

        def layer(fan_in, fan_out):
            s = 1.0 / np.sqrt(fan_in)
            w = rng.uniform(-s, s, size=(fan_in, fan_out))
            b = rng.uniform(-s, s, size=fan_out)
            return w, b

        if hidden_width == 0:
            w, b = layer(d, k)
            params = {"w": w, "b": b}
        else:
            w1, b1 = layer(d, hidden_width)
            w2, b2 = layer(hidden_width, k)
            params = {"w1": w1, "b1": b1, "w2": w2, "b2": b2}
        return cls(d, k, hidden_width, params)

    def param_names(self) -> list[str]:
        return ["w", "b"] if self.hidden_width == 0 else ["w1", "b1", "w2", "b2"]

    def raw_scores(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.d:
            raise DimensionMismatch(f"model expects D={self.d} features, got {x.shape[1]}")
        if self.hidden_width == 0:
            return x @ self.params["w"] + self.params["b"]
        hidden = np.maximum(x @ self.params["w1"] + self.params["b1"], 0.0)
        return hidden @ self.params["w2"] + self.params["b2"]

    def backprop(self, x: np.ndarray, d_scores: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients of a loss w.r.t. params, given its gradient w.r.t. raw scores."""
        if self.hidden_width == 0:
            return {"w": x.T @ d_scores, "b": d_scores.sum(axis=0)}
        pre = x @ self.params["w1"] + self.params["b1"]
        hidden = np.maximum(pre, 0.0)
        d_hidden = (d_scores @ self.params["w2"].T) * (pre > 0.0)
        return {
            "w1": x.T @ d_hidden,
            "b1": d_hidden.sum(axis=0),
            "w2": hidden.T @ d_scores,
            "b2": d_scores.sum(axis=0),
        }

    def parameter_vector(self) -> np.ndarray:
        return np.concatenate([self.params[n].ravel() for n in self.param_names()])

    def set_parameter_vector(self, flat: np.ndarray):
        offset = 0
        for name in self.param_names():
            shape = self.params[name].shape
            size = self.params[name].size
            self.params[name] = flat[offset : offset + size].reshape(shape).copy()
            offset += size

    def copy(self):
        clone = type(self)(self.d, self.k, self.hidden_width,
                           {n: v.copy() for n, v in self.params.items()})
        clone.loss_history = self.loss_history
        return clone

    def to_document(self) -> dict:
        return {
            "format": "credalcp-model",
            "version": 1,
            "order": self.order,
            "d": self.d,
            "k": self.k,
            "hidden_width": self.hidden_width,
            "params": {n: self.params[n].ravel().tolist() for n in self.param_names()},
        }


class FirstOrderModel(_TrunkModel):
    """Probabilistic classifier mapping features to a class distribution."""

    order = "first"

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.raw_scores(x))

    def predict(self, features: np.ndarray) -> SimplexPoint:
        return SimplexPoint(self.predict_proba(features)[0])


class SecondOrderModel(_TrunkModel):
    """Dirichlet regressor mapping features to concentrations above 1."""

    order = "second"

    def predict_theta(self, x: np.ndarray) -> np.ndarray:
        return softplus(self.raw_scores(x)) + 1.0

    def predict(self, features: np.ndarray) -> DirichletParams:
        return DirichletParams(self.predict_theta(features)[0])


MODEL_CLASSES = {"first": FirstOrderModel, "second": SecondOrderModel}


def model_from_document(doc: dict) -> FirstOrderModel | SecondOrderModel:
    cls = MODEL_CLASSES[doc["order"]]
    model = cls.initialize(doc["d"], doc["k"], doc["hidden_width"], seed=0)
    for name in model.param_names():
        shape = model.params[name].shape
        model.params[name] = np.asarray(doc["params"][name], dtype=np.float64).reshape(shape)
    return model


def cross_entropy_from_probs(probs: np.ndarray, labels: np.ndarray) -> float:
    return float(-(labels * np.log(np.maximum(probs, CLAMP))).sum(axis=1).mean())


def dirichlet_nll_from_theta(theta: np.ndarray, labels: np.ndarray) -> float:
    log_beta = gammaln(theta).sum(axis=1) - gammaln(theta.sum(axis=1))
    log_labels = np.log(np.maximum(labels, CLAMP))
    return float((log_beta - ((theta - 1.0) * log_labels).sum(axis=1)).mean())


def cross_entropy_loss(model: FirstOrderModel, batch: list[LabeledExample]) -> float:
    """Mean cross-entropy between label distributions and model predictions."""
    x, labels = stack_examples(batch)
    if labels.shape[1] != model.k:
        raise DimensionMismatch(f"model has K={model.k}, labels have K={labels.shape[1]}")
    return cross_entropy_from_probs(model.predict_proba(x), labels)


def dirichlet_nll_loss(model: SecondOrderModel, batch: list[LabeledExample]) -> float:
    """Mean negative Dirichlet log-likelihood of the labels under the model."""
    x, labels = stack_examples(batch)
    if labels.shape[1] != model.k:
        raise DimensionMismatch(f"model has K={model.k}, labels have K={labels.shape[1]}")
    return dirichlet_nll_from_theta(model.predict_theta(x), labels)


def _loss_and_score_grad(model, x, labels):
    """Loss and its gradient w.r.t. the raw output scores, per model kind."""
    n = x.shape[0]
    raw = model.raw_scores(x)
    if isinstance(model, FirstOrderModel):
        probs = softmax(raw)
        loss = cross_entropy_from_probs(probs, labels)
        d_raw = (probs - labels) / n
    else:
        theta = softplus(raw) + 1.0
        loss = dirichlet_nll_from_theta(theta, labels)
        log_labels = np.log(np.maximum(labels, CLAMP))
        d_theta = (digamma(theta) - digamma(theta.sum(axis=1, keepdims=True)) - log_labels) / n
        d_raw = d_theta * expit(raw)
    return loss, d_raw


def loss_gradient(model, batch: list[LabeledExample]) -> tuple[float, np.ndarray]:
    """Loss and flat parameter gradient on a batch (no regularization)."""
    x, labels = stack_examples(batch)
    loss, d_raw = _loss_and_score_grad(model, x, labels)
    grads = model.backprop(x, d_raw)
    flat = np.concatenate([grads[n].ravel() for n in model.param_names()])
    return loss, flat


def _full_loss(model, x, labels):
    if isinstance(model, FirstOrderModel):
        return cross_entropy_from_probs(model.predict_proba(x), labels)
    return dirichlet_nll_from_theta(model.predict_theta(x), labels)


def train(model_kind: str, data: list[LabeledExample], config: TrainConfig):
    """Fit a first- or second-order model by mini-batch gradient descent.

    Returns the trained model; ``model.loss_history`` holds the full-data
    loss before training (entry 0) and after every epoch. Raises
    NonFiniteLoss when the loss diverges.
    """
    if model_kind not in MODEL_CLASSES:
        raise ValueError(f"model_kind must be 'first' or 'second', got {model_kind!r}")
    x, labels = stack_examples(data)
    n, d = x.shape
    k = labels.shape[1]
    model = MODEL_CLASSES[model_kind].initialize(d, k, config.hidden_width, config.seed)
    rng = np.random.default_rng(config.seed)
    weight_names = [nm for nm in model.param_names() if nm.startswith("w")]

    history = [_full_loss(model, x, labels)]
    if not np.isfinite(history[0]):
        raise NonFiniteLoss(f"initial loss is {history[0]}")
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            _, d_raw = _loss_and_score_grad(model, x[idx], labels[idx])
            grads = model.backprop(x[idx], d_raw)
            for name in model.param_names():
                step = grads[name]
                if config.l2 > 0 and name in weight_names:
                    step = step + config.l2 * model.params[name]
                model.params[name] -= config.learning_rate * step
        epoch_loss = _full_loss(model, x, labels)
        if not np.isfinite(epoch_loss):
            raise NonFiniteLoss(
                f"loss became {epoch_loss} after epoch {len(history)}; lower the learning rate"
            )
        history.append(epoch_loss)
    model.loss_history = np.array(history)
    return model


@dataclass(frozen=True)
class GradientCheckReport:
    max_rel_error: float
    tolerance: float
    passed: bool
    parameter_count: int = 0


def gradient_check(
    model_kind: str,
    example: LabeledExample,
    tolerance: float = 1e-4,
    seed: int = 0,
    hidden_width: int = 0,
    step: float = 1e-5,
) -> GradientCheckReport:
    """Compare the analytic loss gradient against central finite differences.

    The relative error per parameter uses max(|analytic|, |numeric|, 1e-6)
    as the denominator so exactly-zero gradients do not divide by zero.
    """
    d = example.features.size
    k = example.label_dist.k
    model = MODEL_CLASSES[model_kind].initialize(d, k, hidden_width, seed)
    _, analytic = loss_gradient(model, [example])

    base = model.parameter_vector()
    numeric = np.zeros_like(base)
    probe = model.copy()
    for i in range(base.size):
        for sign in (1.0, -1.0):
            vec = base.copy()
            vec[i] += sign * step
            probe.set_parameter_vector(vec)
            numeric[i] += sign * loss_gradient(probe, [example])[0]
        numeric[i] /= 2 * step

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    max_rel = float(np.max(np.abs(analytic - numeric) / denom))
    return GradientCheckReport(
        max_rel_error=max_rel,
        tolerance=tolerance,
        passed=max_rel < tolerance,
        parameter_count=base.size,
    )
