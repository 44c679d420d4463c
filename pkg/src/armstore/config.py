"""Memory policy configuration: profiles, validation, runtime adjustment.

The policy is three knobs plus housekeeping:

* ``theta``  - remembrance threshold: access count at which an item is
  permanently consolidated and becomes exempt from decay.
* ``gamma``  - grace period in logical steps; an unremembered item only
  decays at step ``t`` when ``t - last_access > gamma``.
* ``alpha``  - per-step multiplicative decay factor, strictly in (0, 1).

``validate`` never raises; it returns the list of violated bounds so
callers (store construction, snapshot load, CLI) can reject invalid
settings without partial effects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import InvalidValue, UnknownProfile

DEFAULT_PRUNE_THRESHOLD = 1e-3

# name -> (theta, gamma, alpha)
PROFILES = {
    "balanced": (3, 5, 0.95),
    "ultra_efficient": (10, 1, 0.90),
    "aggressive": (1, 20, 0.99),
}


@dataclass
class MemoryConfig:
    theta: int
    gamma: int
    alpha: float
    prune_threshold: float = DEFAULT_PRUNE_THRESHOLD
    dimension: int = 1


def profile(name: str, dimension: int) -> MemoryConfig:
    """Build one of the named policy presets for the given vector dimension."""
    try:
        theta, gamma, alpha = PROFILES[name]
    except KeyError:
        raise UnknownProfile(
            f"unknown profile {name!r}; choose from {sorted(PROFILES)}"
        ) from None
    return MemoryConfig(theta=theta, gamma=gamma, alpha=alpha, dimension=dimension)


def _check_theta(value) -> str | None:
    if not isinstance(value, int) or value < 1:
        return f"theta must be an integer >= 1, got {value!r}"
    return None


def _check_gamma(value) -> str | None:
    if not isinstance(value, int) or value < 0:
        return f"gamma must be an integer >= 0, got {value!r}"
    return None


def _check_alpha(value) -> str | None:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not (0.0 < value < 1.0):
        return f"alpha must lie strictly in (0,1), got {value!r}"
    return None


def _check_prune_threshold(value) -> str | None:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not (0.0 <= value < 1.0):
        return f"prune_threshold must lie in [0,1), got {value!r}"
    return None


def _check_dimension(value) -> str | None:
    if not isinstance(value, int) or value < 1:
        return f"dimension must be a positive integer, got {value!r}"
    return None


def validate(config: MemoryConfig) -> list[str]:
    """Return every violated bound (empty list means the config is valid)."""
    checks = (
        _check_theta(config.theta),
        _check_gamma(config.gamma),
        _check_alpha(config.alpha),
        _check_prune_threshold(config.prune_threshold),
        _check_dimension(config.dimension),
    )
    return [msg for msg in checks if msg is not None]


def load_config_file(path, dimension: int | None = None, **overrides) -> MemoryConfig:
    """Read a JSON config object, applying keyword overrides on top.

    Missing keys fall back to the balanced profile. The result is not
    validated here; callers run ``validate`` and decide how to reject.
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise InvalidValue(f"config file {path} must contain a JSON object")
    base_theta, base_gamma, base_alpha = PROFILES["balanced"]
    cfg = MemoryConfig(
        theta=raw.get("theta", base_theta),
        gamma=raw.get("gamma", base_gamma),
        alpha=raw.get("alpha", base_alpha),
        prune_threshold=raw.get("prune_threshold", DEFAULT_PRUNE_THRESHOLD),
        dimension=raw.get("dimension", dimension if dimension is not None else 1),
    )
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def set_alpha_runtime(store, new_alpha: float) -> None:
    """Swap the decay rate on a live store, preserving decay history.

    Pending decay accrued under the old alpha is folded into each item's
    stored strength multiplier first, so strengths already earned never
    change retroactively. An invalid value raises and leaves the store
    untouched.
    """
    message = _check_alpha(new_alpha)
    if message is not None:
        raise InvalidValue(message)
    store.collapse_strengths_to_multiplier()
    store.config.alpha = float(new_alpha)


def set_theta_runtime(store, new_theta: int) -> None:
    """Swap the remembrance threshold; takes effect from the next step.

    No retroactive promotion: an item already at or above the new
    threshold is only promoted when it is next retrieved.
    """
    message = _check_theta(new_theta)
    if message is not None:
        raise InvalidValue(message)
    store.config.theta = int(new_theta)


def set_gamma_runtime(store, new_gamma: int) -> None:
    """Swap the grace period; takes effect from the next step.

    Decay events already accrued under the old gamma are materialized
    before the swap so the new value never recounts past steps.
    """
    message = _check_gamma(new_gamma)
    if message is not None:
        raise InvalidValue(message)
    store.materialize_all_pending()
    store.config.gamma = int(new_gamma)
