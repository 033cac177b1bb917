import math

import numpy as np
import pytest

from digraphstream.l1sketch import (DEFAULT_C_SKETCH, L1Sketch, sketch_estimate_diff, sketch_new,
                                    sketch_rows, sketch_update)


def test_row_count_formula():
    assert sketch_rows(0.2, 0.05) == math.ceil(DEFAULT_C_SKETCH * math.log(20) / 0.04)
    s = L1Sketch(10, 0.2, 0.05)
    assert s.d == sketch_rows(0.2, 0.05)


def test_zero_vector_estimates_zero():
    s = L1Sketch(50, 0.3, 0.1, seed=2)
    assert s.estimate() == 0.0
    assert s.estimate_diff(np.zeros(50)) == 0.0


def test_self_difference_is_exactly_zero():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 5, size=40)
    s = L1Sketch(40, 0.2, 0.05, seed=7)
    for j, v in enumerate(x):
        s.update(j, int(v))
    assert s.estimate_diff(x.astype(float)) == 0.0
    assert s.estimate_diff({j: int(v) for j, v in enumerate(x)}) == 0.0


def test_update_order_does_not_matter():
    rng = np.random.default_rng(1)
    updates = [(int(j), int(d)) for j, d in zip(rng.integers(0, 30, 200), rng.integers(-3, 4, 200))]
    a = L1Sketch(30, 0.25, 0.1, seed=3)
    b = L1Sketch(30, 0.25, 0.1, seed=3)
    for j, d in updates:
        a.update(j, d)
    for j, d in reversed(updates):
        b.update(j, d)
    assert np.array_equal(a.acc, b.acc)


def test_linearity_is_exact():
    rng = np.random.default_rng(2)
    x = rng.integers(0, 4, size=25)
    y = rng.integers(0, 4, size=25)
    sx, sy, sxy = (L1Sketch(25, 0.2, 0.05, seed=11) for _ in range(3))
    for j in range(25):
        sx.update(j, int(x[j]))
        sy.update(j, int(y[j]))
        sxy.update(j, int(x[j] + y[j]))
    assert np.array_equal((sx + sy).acc, sxy.acc)
    assert np.array_equal(sx.implicit_product(x.astype(float)), sx.acc)


def test_same_seed_same_sketch_different_seed_differs():
    a, b, c = L1Sketch(5, 0.3, 0.1, seed=1), L1Sketch(5, 0.3, 0.1, seed=1), L1Sketch(5, 0.3, 0.1, seed=2)
    assert np.array_equal(a.column(3), b.column(3))
    assert not np.array_equal(a.column(3), c.column(3))


def test_estimate_diff_many_matches_single():
    rng = np.random.default_rng(3)
    s = L1Sketch(12, 0.3, 0.1, seed=5)
    for j in range(12):
        s.update(j, int(rng.integers(0, 3)))
    Y = rng.integers(0, 3, size=(9, 12)).astype(float)
    many = s.estimate_diff_many(Y, batch=4)
    single = [s.estimate_diff(y) for y in Y]
    assert np.allclose(many, single, rtol=0, atol=1e-9)


def test_serialization_roundtrip():
    s = L1Sketch(8, 0.3, 0.1, seed=4)
    s.update(2, 3)
    t = L1Sketch.from_bytes(s.to_bytes())
    assert (t.N, t.d, t.seed) == (s.N, s.d, s.seed)
    assert np.array_equal(t.acc, s.acc)
    with pytest.raises(ValueError):
        L1Sketch.from_bytes(s.to_bytes()[:-8])


def test_function_wrappers():
    s = sketch_new(4, 0.3, 0.1, 0)
    sketch_update(s, 1, 2)
    assert sketch_estimate_diff(s, np.array([0.0, 2.0, 0.0, 0.0])) == 0.0


def test_invalid_parameters():
    with pytest.raises(ValueError):
        L1Sketch(4, 1.5, 0.1)
    with pytest.raises(ValueError):
        L1Sketch(4, 0.2, 0.0)
    with pytest.raises(IndexError):
        L1Sketch(4, 0.2, 0.1).update(4, 1)


def test_adding_mismatched_sketches_fails():
    with pytest.raises(ValueError):
        L1Sketch(4, 0.2, 0.1, seed=0) + L1Sketch(4, 0.2, 0.1, seed=1)
