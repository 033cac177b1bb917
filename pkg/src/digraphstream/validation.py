"""Input validation helpers shared by the algorithms and estimators."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import ConfigError, PromiseViolation
from .graphcore import Digraph, Ordering, Tournament
from .streamgen import EdgeStream, PlantedInstance, stream_of


def check_seed(random_state) -> int:
    """Normalize ``random_state`` to a non-negative int usable as a Philox key."""
    if random_state is None:
        return int(np.random.SeedSequence().generate_state(1, np.uint64)[0] >> 1)
    if isinstance(random_state, np.random.Generator):
        return int(random_state.integers(0, 2**63 - 1))
    if isinstance(random_state, numbers.Integral):
        if random_state < 0:
            raise ConfigError("random_state must be non-negative")
        return int(random_state)
    raise ConfigError(f"cannot use {random_state!r} as a random_state")


def check_fraction(value, name: str, *, low=0.0, high=1.0,
                   closed_low=False, closed_high=False) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
    ok_low = v >= low if closed_low else v > low
    ok_high = v <= high if closed_high else v < high
    if not (ok_low and ok_high):
        lb = "[" if closed_low else "("
        rb = "]" if closed_high else ")"
        raise ConfigError(f"{name} must lie in {lb}{low}, {high}{rb}, got {v}")
    return v


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_ordering(sigma, n: int | None = None) -> Ordering:
    if not isinstance(sigma, Ordering):
        sigma = Ordering(sigma)
    if n is not None and sigma.n != n:
        raise ValueError(f"ordering has {sigma.n} vertices, expected {n}")
    return sigma


def check_tournament(t) -> Tournament:
    if isinstance(t, Tournament):
        return t
    if isinstance(t, np.ndarray) and t.ndim == 2 and t.shape[0] == t.shape[1]:
        try:
            return Tournament.from_adjacency(t)
        except ValueError as exc:
            raise PromiseViolation(str(exc)) from None
    raise PromiseViolation(f"expected a tournament, got {type(t).__name__}")


def check_stream(X, *, policy: str = "as-given", pass_budget: int = 1, seed=None) -> EdgeStream:
    """Accept an EdgeStream as-is, or wrap a graph in a fresh stream."""
    if isinstance(X, EdgeStream):
        if X.passes_used:
            raise ConfigError("stream has already been consumed; pass a fresh EdgeStream")
        return X
    if isinstance(X, (Tournament, Digraph, PlantedInstance)):
        return stream_of(X, policy=policy, pass_budget=pass_budget, seed=seed)
    if isinstance(X, np.ndarray) and X.ndim == 2 and X.shape[0] == X.shape[1]:
        return stream_of(check_tournament(X), policy=policy, pass_budget=pass_budget, seed=seed)
    raise ConfigError(f"cannot build an edge stream from {type(X).__name__}")
