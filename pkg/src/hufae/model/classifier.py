"""Four-layer perceptron (input -> hidden... -> classes) trained with softmax CE."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..core.functional import softmax
from ..core.layers import LayerSpec, Sequential
from ..core.losses import cross_entropy_loss
from ..core.optim import OptimizerConfig, optimizer_step
from ..errors import ConfigError, DimensionError
from .config import ClassifierConfig, TrainConfig
from .training import child_rng, run_epochs
from ..validation import check_features, check_labels


def build_classifier(input_dim, num_classes, hidden=(512, 256), seed=0):
    """Dense stack ``input_dim -> *hidden -> num_classes`` with SELU hidden units."""
    if input_dim < 1 or num_classes < 1:
        raise ConfigError("classifier needs positive input and class counts")
    widths = (int(input_dim),) + tuple(int(h) for h in hidden)
    specs = [LayerSpec("dense", widths[i], widths[i + 1], activation="selu")
             for i in range(len(widths) - 1)]
    specs.append(LayerSpec("dense", widths[-1], int(num_classes)))
    net = Sequential.from_specs(specs, prefix="dense", seed=seed)
    net.store.add_buffer("input_mean", np.zeros(int(input_dim)))
    net.store.add_buffer("input_std", np.ones(int(input_dim)))
    return net


def _standardize(net, x):
    return (x - net.store.buffers["input_mean"]) / net.store.buffers["input_std"]


def train_classifier(net, features, labels, config=None, seed=0):
    """Mini-batch Adam on softmax cross-entropy for ``config.epochs`` epochs.

    Only the classifier's own parameters are touched. Returns ``(net, curve)``.
    """
    config = (config or ClassifierConfig()).validate()
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    n_out = net.layers[-1].spec.out_channels
    if len(y) and (y.min() < 0 or y.max() >= n_out):
        raise DimensionError(f"labels must lie in [0, {n_out})")
    if config.standardize:
        mean, std = x.mean(axis=0), x.std(axis=0)
        std[std == 0] = 1.0
        net.store.buffers["input_mean"][...] = mean
        net.store.buffers["input_std"][...] = std
    xs = _standardize(net, x)
    opt = OptimizerConfig(lr=config.lr)
    store = net.store

    def step(idx):
        store.zero_grad()
        logits = net.forward(xs[idx], training=True)
        loss, grad = cross_entropy_loss(logits, y[idx])
        net.backward(grad)
        optimizer_step(store, opt)
        return loss

    schedule = TrainConfig(batch_size=config.batch_size, lr=config.lr,
                           max_epochs=config.epochs, min_epochs=0)
    curve = run_epochs(len(xs), step, schedule, child_rng(seed, "classifier"),
                       label="classifier", epochs=config.epochs)
    for layer in net.layers:
        layer.clear_cache()
    store.reset_optimizer_state()
    return net, curve


def classifier_logits(net, features, batch_size=256):
    x = _standardize(net, np.asarray(features, dtype=np.float64))
    out = [net.forward(x[s:s + batch_size]) for s in range(0, len(x), batch_size)]
    for layer in net.layers:
        layer.clear_cache()
    return np.concatenate(out)


class FeedForwardClassifier(ClassifierMixin, BaseEstimator):
    """scikit-learn wrapper around :func:`build_classifier` / :func:`train_classifier`.

    Parameters
    ----------
    hidden : tuple of int
        Hidden layer widths; the default gives input -> 512 -> 256 -> classes.
    epochs, batch_size, lr : training schedule.
    standardize : bool
        Z-score inputs with training statistics before the first layer.
    random_state : int
    """

    def __init__(self, hidden=(512, 256), epochs=60, batch_size=32, lr=1e-3,
                 standardize=True, random_state=0):
        self.hidden = hidden
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.standardize = standardize
        self.random_state = random_state

    def _config(self):
        return ClassifierConfig(hidden=self.hidden, epochs=self.epochs,
                                batch_size=self.batch_size, lr=self.lr,
                                standardize=self.standardize)

    def fit(self, X, y):
        X = check_features(X)
        y = check_labels(y, len(X))
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        self.n_features_in_ = X.shape[1]
        self.net_ = build_classifier(X.shape[1], len(self.classes_), self.hidden,
                                     seed=self.random_state)
        self.net_, self.loss_curve_ = train_classifier(self.net_, X, y_idx, self._config(),
                                                       seed=self.random_state)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "net_")
        X = check_features(X, n_features=self.n_features_in_)
        return classifier_logits(self.net_, X)

    def predict_proba(self, X):
        return softmax(self.decision_function(X), axis=1)

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
