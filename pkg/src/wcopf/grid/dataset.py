"""Dispatch datasets: generation, CSV round-trip, scaling."""

import csv
from dataclasses import dataclass, replace

import numpy as np

from ..errors import SchemaError, TooManyInfeasible
from ..simplex import LpStatus
from .dcopf import solve_dcopf
from .ptdf import compute_ptdf
from .sampling import sample_demands_lhs

SPLITS = ("train", "val", "test")
SPLIT_FRACTIONS = (0.7, 0.1, 0.2)
RESAMPLE_FACTOR = 10

DATA_BOX = (0.6, 1.0)  # demand range as a fraction of nominal


@dataclass(frozen=True)
class Scaler:
    """Per-dimension affine map: scaled = (raw - offset) / scale."""

    offset: np.ndarray
    scale: np.ndarray

    def transform(self, raw):
        return (np.asarray(raw, dtype=float) - self.offset) / self.scale

    def inverse(self, scaled):
        return np.asarray(scaled, dtype=float) * self.scale + self.offset


def _guard_scale(scale):
    scale = np.asarray(scale, dtype=float).copy()
    scale[np.abs(scale) < 1e-12] = 1.0
    return scale


def box_input_scaler(grid, box=DATA_BOX):
    """Scaler mapping the demand sampling box onto the unit hypercube."""
    nominal = grid.nominal_demand()
    lo, hi = box
    return Scaler(offset=lo * nominal, scale=_guard_scale((hi - lo) * nominal))


def gen_output_scaler(grid):
    """Scaler dividing each dispatch target by its generator's p_max."""
    p_max = np.array([g.p_max for g in grid.generators])
    return Scaler(offset=np.zeros(len(p_max)), scale=_guard_scale(p_max))


@dataclass
class Dataset:
    inputs: np.ndarray        # (N, n_load) raw MW
    targets: np.ndarray       # (N, n_gen) raw MW
    split: np.ndarray         # (N,) entries from SPLITS
    input_scaler: Scaler
    output_scaler: Scaler

    @property
    def n_inputs(self):
        return self.inputs.shape[1]

    @property
    def n_outputs(self):
        return self.targets.shape[1]

    def mask(self, split):
        return self.split == split

    def scaled(self, split):
        """(inputs, targets) of one split in scaled units."""
        m = self.mask(split)
        return (self.input_scaler.transform(self.inputs[m]),
                self.output_scaler.transform(self.targets[m]))


def split_sizes(n):
    n_train = int(round(SPLIT_FRACTIONS[0] * n))
    n_val = int(round(SPLIT_FRACTIONS[1] * n))
    n_train = min(n_train, n)
    n_val = min(n_val, n - n_train)
    return n_train, n_val, n - n_train - n_val


def generate_dataset(grid, n, seed) -> Dataset:
    """Sample demands, solve DC-OPF for each, and assemble a labeled dataset.

    Infeasible samples are discarded and replaced with fresh LHS batches
    drawn from follow-up seeds (seed + 1, seed + 2, ...).  Raises
    TooManyInfeasible once 10 n candidate samples have been tried.
    """
    ptdf = compute_ptdf(grid)
    inputs = []
    targets = []
    tried = 0
    attempt = 0
    while len(inputs) < n:
        if tried >= RESAMPLE_FACTOR * n:
            raise TooManyInfeasible(
                f"{tried} samples tried, only {len(inputs)} of {n} feasible")
        batch = sample_demands_lhs(grid, n, seed + attempt, box=DATA_BOX)
        attempt += 1
        for demands in batch:
            if tried >= RESAMPLE_FACTOR * n:
                break
            tried += 1
            sol = solve_dcopf(grid, ptdf, demands)
            if sol.status == LpStatus.OPTIMAL:
                inputs.append(demands)
                targets.append(sol.p)
                if len(inputs) == n:
                    break
    inputs = np.array(inputs)
    targets = np.array(targets)

    n_train, n_val, n_test = split_sizes(n)
    order = np.random.default_rng((seed, 1)).permutation(n)
    split = np.empty(n, dtype=object)
    split[order[:n_train]] = "train"
    split[order[n_train:n_train + n_val]] = "val"
    split[order[n_train + n_val:]] = "test"

    return Dataset(inputs=inputs, targets=targets, split=split,
                   input_scaler=box_input_scaler(grid),
                   output_scaler=gen_output_scaler(grid))


def _fit_scalers_from_train(inputs, targets, split):
    train = split == "train"
    if not train.any():
        raise SchemaError("dataset has no train rows to fit scalers on")
    x = inputs[train]
    y = targets[train]
    in_scaler = Scaler(offset=x.min(axis=0), scale=_guard_scale(x.max(axis=0) - x.min(axis=0)))
    out_scaler = Scaler(offset=y.min(axis=0), scale=_guard_scale(y.max(axis=0) - y.min(axis=0)))
    return in_scaler, out_scaler


def rescale_with_grid(dataset, grid) -> Dataset:
    """Replace data-fitted scalers with the grid-derived box / p_max scalers."""
    if dataset.n_inputs != grid.n_load or dataset.n_outputs != grid.n_gen:
        raise SchemaError("dataset dimensions do not match the grid")
    return replace(dataset, input_scaler=box_input_scaler(grid),
                   output_scaler=gen_output_scaler(grid))


def save_dataset(dataset, path):
    """Write the dataset as CSV: d_0.., g_0.., split; floats round-trip exactly."""
    header = ([f"d_{i}" for i in range(dataset.n_inputs)]
              + [f"g_{i}" for i in range(dataset.n_outputs)] + ["split"])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(dataset.inputs.shape[0]):
            row = [repr(float(v)) for v in dataset.inputs[i]]
            row += [repr(float(v)) for v in dataset.targets[i]]
            row.append(str(dataset.split[i]))
            writer.writerow(row)


def load_dataset(path) -> Dataset:
    """Read a dataset CSV; scalers are fitted on the train split."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        n_in = sum(1 for h in header if h.startswith("d_"))
        n_out = sum(1 for h in header if h.startswith("g_"))
        expected = ([f"d_{i}" for i in range(n_in)]
                    + [f"g_{i}" for i in range(n_out)] + ["split"])
        if header != expected or n_in == 0 or n_out == 0:
            raise SchemaError(f"{path}: malformed header {header}")
        inputs = []
        targets = []
        split = []
        for ln, row in enumerate(reader, start=2):
            if len(row) != n_in + n_out + 1:
                raise SchemaError(f"{path}: line {ln}: expected {n_in + n_out + 1} fields")
            try:
                vals = [float(v) for v in row[:n_in + n_out]]
            except ValueError as exc:
                raise SchemaError(f"{path}: line {ln}: {exc}") from None
            if not all(np.isfinite(vals)):
                raise SchemaError(f"{path}: line {ln}: nonfinite value")
            if row[-1] not in SPLITS:
                raise SchemaError(f"{path}: line {ln}: bad split label {row[-1]!r}")
            inputs.append(vals[:n_in])
            targets.append(vals[n_in:])
            split.append(row[-1])
    if not inputs:
        raise SchemaError(f"{path}: no data rows")
    inputs = np.array(inputs)
    targets = np.array(targets)
    split = np.array(split, dtype=object)
    in_scaler, out_scaler = _fit_scalers_from_train(inputs, targets, split)
    return Dataset(inputs=inputs, targets=targets, split=split,
                   input_scaler=in_scaler, output_scaler=out_scaler)
