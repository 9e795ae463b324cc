"""CSV / JSON emitters for the data behind loss, spectrum, confusion and feature plots."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .metrics import EvalReport
from .spectrum import FrequencyResponse

KINDS = ("loss_curve", "freq_response", "confusion", "feature_dump", "report")


def _num(v):
    return repr(float(v))


def _write_csv(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def export_plot_data(kind, payload, path):
    """Write ``payload`` for plot ``kind`` to ``path`` and return the path.

    loss_curve
        sequence of per-epoch losses -> CSV ``epoch,loss``.
    freq_response
        :class:`FrequencyResponse` -> CSV ``bin,frequency_hz,magnitude``.
    confusion
        :class:`EvalReport` -> JSON with class names and the count matrix.
    feature_dump
        dict with ``raw`` (W,), ``codes`` (C, W) and ``channels`` -> CSV
        ``t,raw,code_<c>...``.
    report
        :class:`EvalReport` -> JSON with every metric.
    """
    path = Path(path)
    if kind == "loss_curve":
        losses = np.asarray(payload, dtype=np.float64).ravel()
        _write_csv(path, ["epoch", "loss"], [[i + 1, _num(v)] for i, v in enumerate(losses)])
    elif kind == "freq_response":
        if not isinstance(payload, FrequencyResponse):
            raise ConfigError("freq_response export needs a FrequencyResponse")
        _write_csv(path, ["bin", "frequency_hz", "magnitude"],
                   [[i, _num(f), _num(m)] for i, (f, m) in
                    enumerate(zip(payload.frequencies_hz, payload.magnitudes))])
    elif kind == "confusion":
        if not isinstance(payload, EvalReport):
            raise ConfigError("confusion export needs an EvalReport")
        _write_json(path, {"class_names": list(payload.class_names),
                           "rows": "true", "columns": "predicted",
                           "matrix": payload.confusion.tolist()})
    elif kind == "feature_dump":
        raw = np.asarray(payload["raw"], dtype=np.float64)
        codes = np.asarray(payload["codes"], dtype=np.float64)
        channels = list(payload["channels"])
        if codes.shape != (len(channels), len(raw)):
            raise ConfigError("codes must be (len(channels), len(raw))")
        header = ["t", "raw"] + [f"code_{c}" for c in channels]
        _write_csv(path, header, [[t, _num(raw[t])] + [_num(v) for v in codes[:, t]]
                                  for t in range(len(raw))])
    elif kind == "report":
        if not isinstance(payload, EvalReport):
            raise ConfigError("report export needs an EvalReport")
        _write_json(path, payload.to_dict())
    else:
        raise ConfigError(f"unknown export kind {kind!r}; expected one of {KINDS}")
    return path
