import numpy as np
import pytest

from wcopf.errors import SchemaError, TooManyInfeasible
from wcopf.grid import (builtin_grid, compute_ptdf, generate_dataset,
                        grid_from_dict, load_dataset, rescale_with_grid,
                        save_dataset, solve_dcopf)
from wcopf.grid.dataset import split_sizes
from wcopf.simplex import LpStatus


@pytest.fixture(scope="module")
def ds100():
    return generate_dataset(builtin_grid("case3"), 100, seed=7)


def test_split_proportions(ds100):
    assert split_sizes(100) == (70, 10, 20)
    assert (ds100.split == "train").sum() == 70
    assert (ds100.split == "val").sum() == 10
    assert (ds100.split == "test").sum() == 20


def test_targets_solve_the_dcopf(ds100):
    g = builtin_grid("case3")
    ptdf = compute_ptdf(g)
    for i in range(0, 100, 17):
        sol = solve_dcopf(g, ptdf, ds100.inputs[i])
        assert sol.status == LpStatus.OPTIMAL
        costs = np.array([x.cost for x in g.generators])
        assert costs @ ds100.targets[i] == pytest.approx(sol.cost, abs=1e-6)
        assert ds100.targets[i].sum() == pytest.approx(ds100.inputs[i].sum(), abs=1e-5)


def test_grid_scalers_map_box_to_unit(ds100):
    x = ds100.input_scaler.transform(ds100.inputs)
    assert np.all(x >= -1e-9) and np.all(x <= 1.0 + 1e-9)
    y = ds100.output_scaler.transform(ds100.targets)
    assert np.all(y >= -1e-9) and np.all(y <= 1.0 + 1e-9)


def test_generation_deterministic():
    g = builtin_grid("case3")
    a = generate_dataset(g, 40, seed=3)
    b = generate_dataset(g, 40, seed=3)
    assert np.array_equal(a.inputs, b.inputs)
    assert np.array_equal(a.targets, b.targets)
    assert np.array_equal(a.split, b.split)


def test_csv_roundtrip_bit_exact(ds100, tmp_path):
    p = tmp_path / "data.csv"
    save_dataset(ds100, p)
    loaded = load_dataset(p)
    assert np.array_equal(loaded.inputs, ds100.inputs)
    assert np.array_equal(loaded.targets, ds100.targets)
    assert np.array_equal(loaded.split, ds100.split)


def test_loaded_scalers_fit_on_train_only(ds100, tmp_path):
    p = tmp_path / "data.csv"
    save_dataset(ds100, p)
    loaded = load_dataset(p)
    train = loaded.split == "train"
    assert np.allclose(loaded.input_scaler.offset, loaded.inputs[train].min(axis=0))
    x_train, _ = loaded.scaled("train")
    assert x_train.min() == pytest.approx(0.0, abs=1e-12)
    assert x_train.max() == pytest.approx(1.0, abs=1e-12)
    # grid rescale restores the box-derived scalers
    g = builtin_grid("case3")
    rescaled = rescale_with_grid(loaded, g)
    assert np.allclose(rescaled.input_scaler.offset, 0.6 * g.nominal_demand())


def test_load_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("d_0,g_0,banana\n1.0,2.0,train\n")
    with pytest.raises(SchemaError, match="header"):
        load_dataset(p)


def test_load_rejects_bad_float(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("d_0,g_0,split\n1.0,abc,train\n")
    with pytest.raises(SchemaError, match="line 2"):
        load_dataset(p)


def test_load_rejects_bad_split_label(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("d_0,g_0,split\n1.0,2.0,holdout\n")
    with pytest.raises(SchemaError, match="split"):
        load_dataset(p)


def test_load_rejects_missing_field(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("d_0,g_0,split\n1.0,train\n")
    with pytest.raises(SchemaError, match="fields"):
        load_dataset(p)


def test_too_many_infeasible():
    # capacity below the lower edge of the demand box: nothing is feasible
    g = grid_from_dict({
        "buses": [1, 2], "slack": 1,
        "generators": [{"bus": 1, "p_min": 0.0, "p_max": 10.0, "cost": 1.0}],
        "loads": [{"bus": 2, "nominal": 100.0}],
        "lines": [{"from": 1, "to": 2, "susceptance": 5.0, "limit": 1000.0}],
    })
    with pytest.raises(TooManyInfeasible):
        generate_dataset(g, 10, seed=0)


def test_resampling_fills_partial_feasibility():
    # feasible only when demand <= 80: roughly half the 60..100 box
    g = grid_from_dict({
        "buses": [1, 2], "slack": 1,
        "generators": [{"bus": 1, "p_min": 0.0, "p_max": 80.0, "cost": 1.0}],
        "loads": [{"bus": 2, "nominal": 100.0}],
        "lines": [{"from": 1, "to": 2, "susceptance": 5.0, "limit": 1000.0}],
    })
    ds = generate_dataset(g, 30, seed=1)
    assert ds.inputs.shape == (30, 1)
    assert np.all(ds.inputs <= 80.0 + 1e-9)
