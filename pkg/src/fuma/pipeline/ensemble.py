"""The trained ensemble artifact and its versioned JSON persistence.

One artifact bundles every per-(method, level) error model, the searched
combination thresholds, and an echo of the training configuration.  All
model coefficients are stored as shortest round-trip decimal strings, so a
saved file reproduces the in-memory model bit for bit on any platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..combiner import ThresholdResult
from ..errors import DataFormatError, RegistryMismatch
from ..features.registry import registry_hash
from ..gam import GamModel, SmoothTerm

FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainedEnsemble:
    """Everything the testing phase needs, persisted as one JSON file.

    Attributes
    ----------
    registry_hash : str
        Hash of the feature registry the error models were trained on.
    methods : tuple of str
        The forecasting-method pool, in canonical order.
    levels : tuple of int
        Confidence levels (percent) the ensemble can forecast at.
    models : mapping of (str, int) to GamModel
        One error model per (method, level) pair; complete over the grid.
    thresholds : mapping of str to ThresholdResult
        Selected combination thresholds per mode (``mean``/``weighted``).
    config : mapping
        Echo of the training run: seed, series counts, grid, search level.
    """

    registry_hash: str
    methods: tuple
    levels: tuple
    models: Mapping[tuple, GamModel]
    thresholds: Mapping[str, ThresholdResult]
    config: Mapping
    version: int = FORMAT_VERSION

    def __post_init__(self) -> None:
        expected = {(m, lv) for m in self.methods for lv in self.levels}
        have = set(self.models)
        if have != expected:
            raise ValueError(
                f"models must cover methods x levels exactly; missing "
                f"{sorted(expected - have)}, extra {sorted(have - expected)}")
        for (method, level), model in self.models.items():
            if model.registry_hash != self.registry_hash:
                raise ValueError(
                    f"model ({method}, {level}) was built against a "
                    "different feature registry")

    def threshold_for(self, frequency: str, mode: str) -> float:
        """The stored threshold for one frequency and combination mode."""
        if mode not in self.thresholds:
            raise KeyError(f"no thresholds stored for mode {mode!r}")
        optimal = self.thresholds[mode].optimal
        if frequency not in optimal:
            raise KeyError(f"no threshold stored for frequency {frequency!r}")
        return optimal[frequency]


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_vec(arr) -> list[str]:
    return [_fmt(v) for v in np.asarray(arr, dtype=np.float64)]


def _parse_vec(items) -> np.ndarray:
    return np.asarray([float(v) for v in items], dtype=np.float64)


def _model_to_dict(model: GamModel) -> dict:
    return {
        "method": model.method,
        "level_pct": int(model.level_pct),
        "intercept": _fmt(model.intercept),
        "linear_names": list(model.linear_names),
        "linear_coefs": _fmt_vec(model.linear_coefs),
        "smooths": [
            {
                "name": term.name,
                "knots": _fmt_vec(term.knots),
                "coef": _fmt_vec(term.coef),
                "lam": _fmt(term.lam),
                "edf": _fmt(term.edf),
            }
            for term in model.smooths
        ],
        "feature_names": list(model.feature_names),
        "registry_hash": model.registry_hash,
    }


def _model_from_dict(body: dict) -> GamModel:
    return GamModel(
        method=body["method"],
        level_pct=int(body["level_pct"]),
        intercept=float(body["intercept"]),
        linear_names=tuple(body["linear_names"]),
        linear_coefs=_parse_vec(body["linear_coefs"]),
        smooths=tuple(
            SmoothTerm(
                name=term["name"],
                knots=_parse_vec(term["knots"]),
                coef=_parse_vec(term["coef"]),
                lam=float(term["lam"]),
                edf=float(term["edf"]),
            )
            for term in body["smooths"]
        ),
        feature_names=tuple(body["feature_names"]),
        registry_hash=body["registry_hash"],
    )


def _threshold_to_dict(result: ThresholdResult) -> dict:
    return {
        "mode": result.mode,
        "level_pct": int(result.level_pct),
        "optimal": {freq: _fmt(tr) for freq, tr in result.optimal.items()},
        "path": [[freq, _fmt(tr), _fmt(score)]
                 for freq, tr, score in result.path],
        "excluded": {freq: int(n) for freq, n in result.excluded.items()},
    }


def _threshold_from_dict(body: dict) -> ThresholdResult:
    return ThresholdResult(
        mode=body["mode"],
        level_pct=int(body["level_pct"]),
        optimal={freq: float(tr) for freq, tr in body["optimal"].items()},
        path=tuple((freq, float(tr), float(score))
                   for freq, tr, score in body["path"]),
        excluded={freq: int(n) for freq, n in body["excluded"].items()},
    )


def save_ensemble(ensemble: TrainedEnsemble, path) -> None:
    """Write the ensemble as versioned JSON (stable key and model order)."""
    body = {
        "format_version": ensemble.version,
        "registry_hash": ensemble.registry_hash,
        "methods": list(ensemble.methods),
        "levels": [int(lv) for lv in ensemble.levels],
        "config": ensemble.config,
        "models": [
            _model_to_dict(ensemble.models[key])
            for key in sorted(ensemble.models)
        ],
        "thresholds": {
            mode: _threshold_to_dict(res)
            for mode, res in sorted(ensemble.thresholds.items())
        },
    }
    with open(path, "w") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_ensemble(path, require_current_registry: bool = True
                  ) -> TrainedEnsemble:
    """Read an ensemble file, checking version and feature-registry hash."""
    with open(path) as fh:
        try:
            body = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    for field in ("format_version", "registry_hash", "methods", "levels",
                  "models", "thresholds"):
        if field not in body:
            raise DataFormatError(f"{path}: missing field {field!r}")
    if body["format_version"] != FORMAT_VERSION:
        raise DataFormatError(
            f"{path}: unsupported format version {body['format_version']!r}; "
            f"this build reads version {FORMAT_VERSION}")
    if require_current_registry and body["registry_hash"] != registry_hash():
        raise RegistryMismatch(
            f"{path} was trained against feature registry "
            f"{body['registry_hash'][:12]}..., but this build exports "
            f"{registry_hash()[:12]}...")
    try:
        models = {}
        for entry in body["models"]:
            model = _model_from_dict(entry)
            models[(model.method, model.level_pct)] = model
        ensemble = TrainedEnsemble(
            registry_hash=body["registry_hash"],
            methods=tuple(body["methods"]),
            levels=tuple(int(lv) for lv in body["levels"]),
            models=models,
            thresholds={
                mode: _threshold_from_dict(res)
                for mode, res in body["thresholds"].items()
            },
            config=body.get("config", {}),
            version=body["format_version"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: malformed ensemble: {exc}") from exc
    return ensemble
