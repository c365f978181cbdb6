"""Which layers move the worst-case violation the most.

Trains a plain network per seed, differentiates its certified worst
case with respect to every parameter, and averages the absolute
derivatives per layer; values are reported relative to the last layer.
"""

from dataclasses import dataclass

import numpy as np

from ..verifier.gradient import worst_case_gradient
from ..verifier.milp import solve_worst_case
from .config import TrainConfig
from .loops import scaled_gen_box, train_standard, unit_box


@dataclass
class SensitivityReport:
    layer_values: list    # per layer, normalized so the last entry is 1.0
    n_seeds: int          # seeds that produced a violation to differentiate
    layer_dims: tuple

    def to_dict(self):
        return {"layer_values": [float(v) for v in self.layer_values],
                "n_seeds": int(self.n_seeds),
                "layer_dims": [int(d) for d in self.layer_dims]}


def _layer_means(grads):
    vals = []
    for w, b in zip(grads.weights, grads.biases):
        pooled = np.concatenate([np.abs(w).ravel(), np.abs(b).ravel()])
        vals.append(float(pooled.mean()))
    return vals


def layer_sensitivity(arch, dataset, gen_bounds, seeds,
                      config: TrainConfig = None, box=None):
    """Mean |d v_g / d theta| per layer, averaged over seeds.

    Seeds whose trained network has nothing to violate contribute no
    gradient and are skipped; at least one seed must violate.
    """
    if len(seeds) < 1:
        raise ValueError("at least one seed is required")
    if config is None:
        config = TrainConfig()
    if gen_bounds is None:
        gen_bounds = scaled_gen_box(dataset)
    if box is None:
        box = unit_box(dataset.n_inputs)

    per_seed = []
    dims = None
    for seed in seeds:
        params, _ = train_standard(dataset, arch, config.replaced(seed=seed))
        dims = tuple(params.layer_dims)
        cert = solve_worst_case(params, box, gen_bounds,
                                node_limit=config.node_limit)
        if cert.value <= 0.0:
            continue
        grads = worst_case_gradient(params, cert, last_layer_only=False)
        per_seed.append(_layer_means(grads))
    if not per_seed:
        raise ValueError("no seed produced a violating network; "
                         "nothing to differentiate")
    mean_vals = np.mean(np.asarray(per_seed, dtype=float), axis=0)
    normalized = mean_vals / mean_vals[-1]
    return SensitivityReport(layer_values=[float(v) for v in normalized],
                             n_seeds=len(per_seed), layer_dims=dims)
