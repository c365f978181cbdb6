"""Training configuration shared by every training mode."""

import json
from dataclasses import asdict, dataclass, replace

from ..errors import SchemaError
from ..verifier.milp import DEFAULT_NODE_LIMIT


@dataclass(frozen=True)
class TrainConfig:
    """Knobs for the training loops and the sequential phase.

    lambda0 / lambda_g / lambda_wc / lambda_ewc weight the error loss,
    the generator-bound penalty, the worst-case violation term and the
    anchor (EWC) term.  warmup epochs run on the error loss alone before
    any verification; afterwards the verifier runs every wc_every
    epochs.  max_iters and early_stop_rel govern the sequential phase.
    """

    alpha: float = 1e-3
    epochs: int = 200
    warmup: int = 50
    lambda0: float = 1.0
    lambda_wc: float = 0.1
    lambda_g: float = 0.1
    lambda_ewc: float = 1.0
    seed: int = 0
    last_layer_only: bool = True
    batch_size: int = None
    wc_every: int = 1
    early_stop_rel: float = 0.10
    max_iters: int = 25
    node_limit: int = DEFAULT_NODE_LIMIT

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.epochs < 0 or self.warmup < 0:
            raise ValueError("epochs and warmup must be nonnegative")
        for name in ("lambda0", "lambda_wc", "lambda_g", "lambda_ewc",
                     "early_stop_rel"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive when set")
        if self.wc_every < 1:
            raise ValueError("wc_every must be at least 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.node_limit < 1:
            raise ValueError("node_limit must be positive")

    def replaced(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        return asdict(self)


def config_from_dict(doc, overrides=None):
    """TrainConfig from a flat dict; unknown keys are schema errors."""
    if not isinstance(doc, dict):
        raise SchemaError("config must be a JSON object")
    known = set(TrainConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(doc)
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return TrainConfig(**merged)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad config value: {exc}") from exc


def load_config(path, overrides=None):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(doc, overrides)
