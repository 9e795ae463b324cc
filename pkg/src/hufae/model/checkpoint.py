"""Directory checkpoints: ``manifest.json`` plus raw little-endian ``params.bin``."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import CheckpointError, ConfigError
from .classifier import FeedForwardClassifier, build_classifier
from .config import ClassifierConfig, HufConfig, SensorLayout
from .huf import HufClassifier, HufFeatureExtractor, HufModel

FORMAT_VERSION = 1
MANIFEST = "manifest.json"
PARAMS = "params.bin"
_DTYPE = np.dtype("<f8")


@dataclass
class HufCheckpoint:
    """Everything needed to rebuild a trained pipeline bit for bit."""

    model: HufModel
    classifier: Optional[FeedForwardClassifier] = None
    metadata: dict = field(default_factory=dict)
    run_config: Optional[dict] = None

    @classmethod
    def from_estimator(cls, est, metadata=None, run_config=None):
        if isinstance(est, HufClassifier):
            extractor, clf = est.extractor_, getattr(est, "classifier_", None)
        elif isinstance(est, HufFeatureExtractor):
            extractor, clf = est, None
        else:
            raise TypeError("expected a fitted HufClassifier or HufFeatureExtractor")
        meta = {"training": summarize_history(getattr(extractor, "history_", {}))}
        meta.update(metadata or {})
        return cls(extractor.model_, clf, meta, run_config)

    def to_estimator(self):
        model = self.model
        ext = HufFeatureExtractor(model.layout, model.config, model.seed)
        ext.model_ = model
        ext.history_ = {}
        if self.classifier is None:
            return ext
        est = HufClassifier(model.layout, model.config, None, model.seed)
        est.extractor_ = ext
        est.classifier_ = self.classifier
        est.classes_ = self.classifier.classes_
        return est

    def arrays(self):
        """Ordered ``name -> (array, frozen)`` over every stored tensor."""
        out = {"norm/mean": (self.model.norm_mean, True), "norm/std": (self.model.norm_std, True)}
        stores = dict(self.model.networks())
        if self.classifier is not None:
            stores["classifier"] = self.classifier.net_.store
        for net_name, store in stores.items():
            for n, p in store.entries.items():
                out[f"{net_name}/{n}"] = (p.value, p.frozen)
            for n, b in store.buffers.items():
                out[f"{net_name}/{n}"] = (b, True)
        return out


def summarize_history(history):
    """Per-block epochs and final losses from an extractor's ``history_``."""
    out = {}
    for block, hist in sorted(history.items()):
        if "stages" in hist:
            out[block] = [{"epochs": s["epochs"], "final_loss": s["final_loss"]}
                          for s in hist["stages"]]
        else:
            curve = hist["curve"]
            out[block] = [{"epochs": len(curve), "final_loss": curve[-1] if curve else None}]
    return out


def _manifest(ckpt):
    model = ckpt.model
    entries, offset = [], 0
    for name, (arr, frozen) in ckpt.arrays().items():
        nbytes = int(arr.size) * _DTYPE.itemsize
        entries.append({"name": name, "shape": list(arr.shape), "dtype": "f64",
                        "offset": offset, "length": nbytes, "frozen": bool(frozen)})
        offset += nbytes
    clf = None
    if ckpt.classifier is not None:
        c = ckpt.classifier
        clf = {"config": ClassifierConfig(c.hidden, c.epochs, c.batch_size, c.lr,
                                          c.standardize).to_dict(),
               "random_state": int(c.random_state),
               "input_dim": int(c.n_features_in_),
               "classes": [c_.item() for c_ in np.asarray(c.classes_)]}
    return {
        "format_version": FORMAT_VERSION,
        "layout": model.layout.to_dict(),
        "config": model.config.to_dict(),
        "seed": model.seed,
        "trained": dict(model.trained),
        "classifier": clf,
        "metadata": ckpt.metadata,
        "run_config": ckpt.run_config,
        "params": entries,
        "total_bytes": offset,
    }


def save_checkpoint(ckpt, path):
    """Write ``ckpt`` into directory ``path`` (created if needed)."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    manifest = _manifest(ckpt)
    blob = b"".join(np.ascontiguousarray(arr, dtype=_DTYPE).tobytes()
                    for arr, _ in ckpt.arrays().values())
    manifest["sha256"] = hashlib.sha256(blob).hexdigest()
    (path / PARAMS).write_bytes(blob)
    (path / MANIFEST).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n",
                                 encoding="utf-8")
    return path


def read_manifest(path):
    path = Path(path)
    try:
        manifest = json.loads((path / MANIFEST).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise CheckpointError(f"no checkpoint manifest in {path}") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"unreadable checkpoint manifest: {exc}") from exc
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"checkpoint format version {version!r} is not supported "
                              f"(expected {FORMAT_VERSION})")
    return manifest


def load_checkpoint(path):
    """Rebuild a :class:`HufCheckpoint`; any inconsistency raises CheckpointError."""
    path = Path(path)
    manifest = read_manifest(path)
    try:
        blob = (path / PARAMS).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read {PARAMS}: {exc}") from exc
    if len(blob) != manifest.get("total_bytes"):
        raise CheckpointError(f"{PARAMS} has {len(blob)} bytes, manifest declares "
                              f"{manifest.get('total_bytes')} (truncated or corrupt)")
    if hashlib.sha256(blob).hexdigest() != manifest.get("sha256"):
        raise CheckpointError(f"{PARAMS} checksum mismatch")
    try:
        model = HufModel(SensorLayout.from_dict(manifest["layout"]),
                         HufConfig.from_dict(manifest["config"]), manifest["seed"])
        clf = None
        if manifest["classifier"] is not None:
            info = manifest["classifier"]
            cc = ClassifierConfig.from_dict(info["config"])
            clf = FeedForwardClassifier(cc.hidden, cc.epochs, cc.batch_size, cc.lr,
                                        cc.standardize, info["random_state"])
            clf.classes_ = np.asarray(info["classes"])
            clf.n_features_in_ = info["input_dim"]
            clf.net_ = build_classifier(info["input_dim"], len(clf.classes_), cc.hidden,
                                        seed=info["random_state"])
    except (KeyError, TypeError, ConfigError) as exc:
        raise CheckpointError(f"invalid checkpoint manifest: {exc}") from exc
    ckpt = HufCheckpoint(model, clf, manifest.get("metadata") or {}, manifest.get("run_config"))
    targets = ckpt.arrays()
    listed = [e["name"] for e in manifest["params"]]
    if listed != list(targets):
        missing = sorted(set(targets) - set(listed))
        extra = sorted(set(listed) - set(targets))
        raise CheckpointError(f"parameter index mismatch (missing {missing}, extra {extra})")
    expected_offset = 0
    for entry in manifest["params"]:
        arr, _ = targets[entry["name"]]
        size = int(np.prod(entry["shape"], dtype=np.int64))
        if (list(arr.shape) != entry["shape"] or entry["dtype"] != "f64"
                or entry["offset"] != expected_offset
                or entry["length"] != size * _DTYPE.itemsize
                or entry["offset"] + entry["length"] > len(blob)):
            raise CheckpointError(f"bad index entry for {entry['name']!r}")
        arr[...] = np.frombuffer(blob, dtype=_DTYPE, count=size,
                                 offset=entry["offset"]).reshape(arr.shape)
        expected_offset += entry["length"]
    stores = dict(model.networks())
    if clf is not None:
        stores["classifier"] = clf.net_.store
    for entry in manifest["params"]:
        net_name, _, pname = entry["name"].partition("/")
        if net_name in stores and pname in stores[net_name].entries:
            stores[net_name].entries[pname].frozen = entry["frozen"]
    model.trained.update(manifest["trained"])
    return ckpt
