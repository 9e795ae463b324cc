"""Hierarchical feature extraction: per-axis DR-SAEs, per-unit local fusion,
global fusion across units.

:class:`HufModel` holds the networks; :func:`huf_forward` runs the chain;
:class:`HufFeatureExtractor` and :class:`HufClassifier` are the
scikit-learn facing estimators.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..errors import ConfigError, DimensionError, UsageError
from ..validation import check_labels, check_windows
from .classifier import FeedForwardClassifier
from .config import AXES, ClassifierConfig, HufConfig, SensorLayout
from .dr_sae import DrSae, train_stacked
from .fusion import FusionAe, train_fusion_ae
from .training import child_rng, child_seed

log = logging.getLogger("hufae.model")

STAGES = ("dr_sae", "lff", "gff", "classifier")


@dataclass
class FusionFeatures:
    """Intermediate codes of one forward pass (batched along axis 0).

    ``per_axis_codes`` is ``(N, 6n, C_dr, l)`` (``None`` when not kept),
    ``per_unit_codes`` is ``(N, n, C_lff, l6)`` and ``global_code`` is
    ``(N, C_gff, l12)``, or ``None`` for single-unit layouts.
    """

    per_axis_codes: Optional[np.ndarray]
    per_unit_codes: np.ndarray
    global_code: Optional[np.ndarray]
    l: int
    l6: int
    l12: Optional[int]

    def final_code(self):
        """The code handed to the classifier: global, or the single unit's LFF code."""
        return self.per_unit_codes[:, 0] if self.global_code is None else self.global_code


class HufModel:
    """All autoencoder networks of the hierarchy plus input normalization."""

    def __init__(self, layout=None, config=None, seed=0):
        self.layout = layout or SensorLayout()
        self.config = (config or HufConfig()).validate()
        self.seed = int(seed)
        cfg = self.config
        n = self.layout.n_units
        self.dr_saes = {key: DrSae(cfg.dr_sae, child_seed(seed, f"dr_sae/{key}"))
                        for key in self.dr_keys()}
        lff_in = 6 * cfg.dr_sae.code_channels
        self.lffs = [FusionAe(cfg.lff, lff_in, child_seed(seed, f"lff/{name}"))
                     for name in self.layout.unit_names]
        self.gff = (FusionAe(cfg.gff, n * cfg.lff.code_channels, child_seed(seed, "gff"))
                    if n > 1 else None)
        self.norm_mean = np.zeros(self.layout.n_channels)
        self.norm_std = np.ones(self.layout.n_channels)
        self.trained = {"dr_sae": False, "lff": False, "gff": n == 1}

    # -- keys -------------------------------------------------------------
    def dr_keys(self):
        if self.config.share_axis_weights:
            return list(AXES)
        return [f"{u}/{a}" for u in self.layout.unit_names for a in AXES]

    def dr_key(self, unit, axis):
        if self.config.share_axis_weights:
            return AXES[axis]
        return f"{self.layout.unit_names[unit]}/{AXES[axis]}"

    def networks(self):
        """``name -> ParamStore`` for every block, in a fixed order."""
        nets = {f"dr_sae/{k}": self.dr_saes[k].store for k in self.dr_keys()}
        for name, lff in zip(self.layout.unit_names, self.lffs):
            nets[f"lff/{name}"] = lff.store
        if self.gff is not None:
            nets["gff"] = self.gff.store
        return nets

    # -- forward pieces ---------------------------------------------------
    def normalize(self, X):
        return (X - self.norm_mean[None, :, None]) / self.norm_std[None, :, None]

    def axis_codes(self, xn, unit):
        """DR-SAE codes of one unit: ``(N, 6, C_dr, l)``."""
        base = 6 * unit
        return np.stack([self.dr_saes[self.dr_key(unit, a)].encode(xn[:, base + a])
                         for a in range(6)], axis=1)

    def unit_code(self, axis_codes, unit):
        n, six, c, length = axis_codes.shape
        return self.lffs[unit].encode(axis_codes.reshape(n, six * c, length))

    def fuse_global(self, per_unit_codes):
        """GFF code from ``(N, n, C_lff, l6)`` per-unit codes (already masked)."""
        if self.gff is None:
            raise UsageError("single-unit layouts have no global fusion block")
        n, units, c, length = per_unit_codes.shape
        return self.gff.encode(per_unit_codes.reshape(n, units * c, length))

    def code_lengths(self, length):
        l6 = self.lffs[0].code_length(length)
        l12 = self.gff.code_length(l6) if self.gff is not None else None
        return l6, l12

    def resolve_mask(self, mask=None):
        active = np.array(self.layout.active_mask, dtype=bool)
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != active.shape:
                raise DimensionError("mask needs one entry per sensor unit")
            active &= mask
        if not active.any():
            raise ConfigError("at least one sensor unit must remain active")
        return active


def huf_forward(windows, model, mask=None, keep_axis_codes=True):
    """Run the full hierarchy on raw windows.

    Parameters
    ----------
    windows : ndarray, shape (N, 6n, W) or (6n, W)
        Raw (un-normalized) sensor windows.
    model : HufModel
    mask : sequence of bool, optional
        Extra per-unit activity mask, combined with the layout's own mask.
        Inactive units get all-zero per-unit codes, so they contribute
        nothing to the global fusion input.
    keep_axis_codes : bool
        Keep the (large) per-axis code tensor in the result.

    Returns
    -------
    FusionFeatures
    """
    X, single = check_windows(windows, model.layout.n_channels, allow_single=True)
    active = model.resolve_mask(mask)
    xn = model.normalize(X)
    n_units = model.layout.n_units
    length = X.shape[2]
    l6, l12 = model.code_lengths(length)
    c_dr = model.config.dr_sae.code_channels
    c_lff = model.config.lff.code_channels
    per_axis = np.zeros((len(X), 6 * n_units, c_dr, length)) if keep_axis_codes else None
    per_unit = np.zeros((len(X), n_units, c_lff, l6))
    for j in range(n_units):
        if not active[j]:
            continue
        codes = model.axis_codes(xn, j)
        if keep_axis_codes:
            per_axis[:, 6 * j: 6 * j + 6] = codes
        per_unit[:, j] = model.unit_code(codes, j)
    global_code = model.fuse_global(per_unit) if model.gff is not None else None
    feats = FusionFeatures(per_axis, per_unit, global_code, length, l6, l12)
    if single:
        feats = FusionFeatures(
            None if per_axis is None else per_axis[0], per_unit[0],
            None if global_code is None else global_code[0], length, l6, l12)
    return feats


def final_features(windows, model, mask=None, batch_size=32):
    """Flattened classifier input, computed in chunks to bound memory."""
    X = check_windows(windows, model.layout.n_channels)
    out = []
    for s in range(0, len(X), batch_size):
        f = huf_forward(X[s:s + batch_size], model, mask, keep_axis_codes=False)
        code = f.final_code()
        out.append(code.reshape(len(code), -1))
    return np.concatenate(out) if out else np.zeros((0, 0))


def _subsample(n, cap, rng):
    if cap is None or n <= cap:
        return np.arange(n)
    return np.sort(rng.choice(n, size=cap, replace=False))


def _train_dr_job(args):
    key, net, signals, cfg, seed, verify = args
    net, hist = train_stacked(net, signals, cfg, seed=seed, verify_frozen=verify)
    return key, net, hist


class HufFeatureExtractor(TransformerMixin, BaseEstimator):
    """Unsupervised hierarchical feature extractor.

    ``fit`` trains, in order, the per-axis DR-SAEs (stack-wise), one local
    fusion autoencoder per sensor unit and, for multi-unit layouts, the
    global fusion autoencoder. Each block is frozen before the next starts.
    ``transform`` returns the flattened final code.

    Parameters
    ----------
    layout : SensorLayout, optional
        Defaults to a single unit.
    config : HufConfig, optional
        Architecture and per-block training settings.
    random_state : int
    n_jobs : int
        Worker processes for the independent DR-SAE jobs.
    verify_frozen : bool
        Check after every optimizer step that frozen parameters are unchanged.
    """

    def __init__(self, layout=None, config=None, random_state=0, n_jobs=1,
                 verify_frozen=False):
        self.layout = layout
        self.config = config
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.verify_frozen = verify_frozen

    # -- stage training ---------------------------------------------------
    def _init_model(self, X):
        layout = self.layout or SensorLayout(n_units=X.shape[1] // 6)
        if X.shape[1] != layout.n_channels:
            raise DimensionError(
                f"layout has {layout.n_channels} channels, data has {X.shape[1]}")
        self.model_ = HufModel(layout, self.config or HufConfig(), self.random_state)
        cols = np.concatenate([X[:, c] for c in range(X.shape[1])]).reshape(X.shape[1], -1)
        mean, std = cols.mean(axis=1), cols.std(axis=1)
        std[std == 0] = 1.0
        self.model_.norm_mean[...] = mean
        self.model_.norm_std[...] = std
        self.history_ = {}

    def fit(self, X, y=None):
        X = check_windows(X)
        self._init_model(X)
        for stage in ("dr_sae", "lff", "gff"):
            self.fit_stage(X, stage)
        return self

    def fit_stage(self, X, stage):
        """Train a single block; earlier blocks must already be trained."""
        X = check_windows(X)
        if not hasattr(self, "model_"):
            if stage != "dr_sae":
                raise UsageError(f"stage {stage!r} requested before the DR-SAE stage")
            self._init_model(X)
        model = self.model_
        order = ("dr_sae", "lff", "gff")
        if stage not in order:
            raise ConfigError(f"unknown stage {stage!r}")
        for prev in order[:order.index(stage)]:
            if not model.trained[prev]:
                raise UsageError(f"stage {stage!r} requested before {prev!r} is trained")
        xn = model.normalize(check_windows(X, model.layout.n_channels))
        getattr(self, f"_fit_{stage}")(xn)
        model.trained[stage] = True
        return self

    def _fit_dr_sae(self, xn):
        model, cfg = self.model_, self.model_.config
        active = model.layout.active_mask
        jobs = []
        for key in model.dr_keys():
            if cfg.share_axis_weights:
                a = AXES.index(key)
                chans = [6 * j + a for j in range(model.layout.n_units) if active[j]]
            else:
                unit_name, axis = key.split("/")
                j = model.layout.unit_names.index(unit_name)
                if not active[j]:
                    model.dr_saes[key].store.freeze()
                    continue
                chans = [6 * j + AXES.index(axis)]
            signals = np.concatenate([xn[:, c] for c in chans])
            rng = child_rng(self.random_state, f"sample/dr_sae/{key}")
            signals = signals[_subsample(len(signals), cfg.dr_train.max_windows, rng)]
            jobs.append((key, model.dr_saes[key], signals, cfg.dr_train,
                         child_seed(self.random_state, f"train/dr_sae/{key}"),
                         self.verify_frozen))
        if self.n_jobs and self.n_jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=self.n_jobs) as pool:
                results = list(pool.map(_train_dr_job, jobs))
        else:
            results = [_train_dr_job(job) for job in jobs]
        for key, net, hist in sorted(results, key=lambda r: r[0]):
            model.dr_saes[key] = net
            self.history_[f"dr_sae/{key}"] = hist

    def _fit_lff(self, xn):
        model, cfg = self.model_, self.model_.config
        for j, name in enumerate(model.layout.unit_names):
            lff = model.lffs[j]
            if not model.layout.active_mask[j]:
                lff.store.freeze()
                continue
            rng = child_rng(self.random_state, f"sample/lff/{name}")
            idx = _subsample(len(xn), cfg.lff_train.max_windows, rng)
            codes = model.axis_codes(xn[idx], j)
            feats = codes.reshape(len(idx), -1, codes.shape[-1])
            _, curve = train_fusion_ae(lff, feats, cfg.lff_train,
                                       seed=child_seed(self.random_state, f"train/lff/{name}"),
                                       label=f"lff.{name}")
            self.history_[f"lff/{name}"] = {"curve": curve}

    def _fit_gff(self, xn):
        model, cfg = self.model_, self.model_.config
        if model.gff is None:
            return
        rng = child_rng(self.random_state, "sample/gff")
        idx = _subsample(len(xn), cfg.gff_train.max_windows, rng)
        active = model.resolve_mask()
        l6, _ = model.code_lengths(xn.shape[2])
        per_unit = np.zeros((len(idx), model.layout.n_units, cfg.lff.code_channels, l6))
        for j in range(model.layout.n_units):
            if active[j]:
                per_unit[:, j] = model.unit_code(model.axis_codes(xn[idx], j), j)
        feats = per_unit.reshape(len(idx), -1, l6)
        _, curve = train_fusion_ae(model.gff, feats, cfg.gff_train,
                                   seed=child_seed(self.random_state, "train/gff"),
                                   label="gff")
        self.history_["gff"] = {"curve": curve}

    # -- inference --------------------------------------------------------
    def _check_trained(self):
        check_is_fitted(self, "model_")
        missing = [s for s, ok in self.model_.trained.items() if not ok]
        if missing:
            raise UsageError(f"blocks not trained yet: {missing}")

    def features(self, X, mask=None, keep_axis_codes=True):
        self._check_trained()
        return huf_forward(X, self.model_, mask, keep_axis_codes)

    def transform(self, X, mask=None):
        self._check_trained()
        return final_features(X, self.model_, mask)


class HufClassifier(ClassifierMixin, BaseEstimator):
    """Hierarchical feature extractor followed by a feed-forward classifier.

    The classifier is trained on frozen extractor features only.
    ``mask`` arguments zero selected units' fused codes at prediction time.
    """

    def __init__(self, layout=None, config=None, classifier=None, random_state=0, n_jobs=1,
                 verify_frozen=False):
        self.layout = layout
        self.config = config
        self.classifier = classifier
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.verify_frozen = verify_frozen

    def _make_classifier(self):
        cc = self.classifier or ClassifierConfig()
        if isinstance(cc, dict):
            cc = ClassifierConfig.from_dict(cc)
        return FeedForwardClassifier(hidden=cc.hidden, epochs=cc.epochs,
                                     batch_size=cc.batch_size, lr=cc.lr,
                                     standardize=cc.standardize,
                                     random_state=child_seed(self.random_state, "classifier"))

    def fit(self, X, y):
        X = check_windows(X)
        y = check_labels(y, len(X))
        self.extractor_ = HufFeatureExtractor(self.layout, self.config, self.random_state,
                                              self.n_jobs, self.verify_frozen).fit(X)
        return self.fit_classifier(X, y)

    def fit_classifier(self, X, y):
        """(Re)train only the classifier on features of the frozen extractor."""
        check_is_fitted(self, "extractor_")
        y = check_labels(y, len(X))
        feats = self.extractor_.transform(X)
        self.classifier_ = self._make_classifier().fit(feats, y)
        self.classes_ = self.classifier_.classes_
        return self

    def transform(self, X, mask=None):
        check_is_fitted(self, "extractor_")
        return self.extractor_.transform(X, mask)

    def predict_proba(self, X, mask=None):
        check_is_fitted(self, "classifier_")
        return self.classifier_.predict_proba(self.transform(X, mask))

    def predict(self, X, mask=None):
        check_is_fitted(self, "classifier_")
        return self.classifier_.predict(self.transform(X, mask))

    def score(self, X, y, sample_weight=None, mask=None):
        from sklearn.metrics import accuracy_score
        return accuracy_score(y, self.predict(X, mask), sample_weight=sample_weight)
