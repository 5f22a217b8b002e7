"""Seeded univariate streams with a single change in their generating process.

Each observation is a sum of sinusoids plus a linear trend, an offset and
Gaussian noise; one parameter set applies before the changepoint and
another from the changepoint onwards. Time starts at ``t = 1``.
"""

import json
from dataclasses import asdict, dataclass, field, replace
from math import pi
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import DataError, UnknownScenarioError

CHANGE_TYPES = ("periodicity", "location", "amplitude", "trend", "mean", "variance", "double")


@dataclass(frozen=True)
class SignalParams:
    omegas: Tuple[float, ...] = ()
    alphas: Tuple[float, ...] = ()
    beta: float = 0.0
    gamma: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if len(self.omegas) != len(self.alphas):
            raise DataError("omegas and alphas must have the same length")
        if self.sigma < 0:
            raise DataError(f"noise level must be nonnegative, got {self.sigma}")

    @property
    def N(self) -> int:
        return len(self.omegas)

    def mean_signal(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = self.beta * t + self.gamma
        for omega, alpha in zip(self.omegas, self.alphas):
            out = out + alpha * np.sin(omega * t)
        return out


@dataclass(frozen=True)
class ChangeScenario:
    """Pre/post parameters with the change taking effect at ``t = tau``.

    ``tau`` is ``None`` for a change-free stream.
    """

    name: str
    pre: SignalParams
    post: SignalParams
    tau: Optional[int] = 300
    T: int = 600
    kind: str = field(default="", compare=False)

    def __post_init__(self):
        if self.T < 1:
            raise DataError(f"length must be positive, got {self.T}")
        if self.tau is not None and not 1 <= self.tau <= self.T:
            raise DataError(f"changepoint {self.tau} outside [1, {self.T}]")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "tau": self.tau,
            "T": self.T,
            "pre": asdict(self.pre),
            "post": asdict(self.post),
        }


def generate(scenario: ChangeScenario, seed: int) -> np.ndarray:
    """Draw one realisation of length ``T``; deterministic given ``seed``."""
    t = np.arange(1, scenario.T + 1, dtype=float)
    noise = np.random.default_rng(seed).standard_normal(scenario.T)
    pre = scenario.pre.mean_signal(t) + scenario.pre.sigma * noise
    if scenario.tau is None:
        return pre
    post = scenario.post.mean_signal(t) + scenario.post.sigma * noise
    return np.where(t < scenario.tau, pre, post)


def _sine(omega, alpha=1.0, **kw) -> SignalParams:
    return SignalParams(omegas=(omega,), alphas=(alpha,), **kw)


def _pi_label(k: int, den: int) -> str:
    return f"{k}π/{den}"


def _build_catalog() -> Dict[str, ChangeScenario]:
    entries = []
    pre = _sine(6 * pi / 75, sigma=0.1)
    for k in (5, 7, 8):
        entries.append(("periodicity", _pi_label(k, 75), pre, replace(pre, omegas=(k * pi / 75,))))
    pre = _sine(4 * pi / 75, sigma=0.1)
    for gamma, label in ((-0.5, "-0.5"), (0.5, "0.5"), (1.0, "1")):
        entries.append(("location", label, pre, replace(pre, gamma=gamma)))
    pre = _sine(13 * pi / 150, sigma=0.1)
    for alpha, label in ((0.5, "0.5"), (2.0, "2"), (3.0, "3")):
        entries.append(("amplitude", label, pre, replace(pre, alphas=(alpha,))))
    pre = _sine(10 * pi / 75, beta=1 / 30, sigma=0.1)
    for beta, label in ((-1 / 30, "(-1/30,10)"), (0.0, "(0,10)"), (2 / 30, "(2/30,10)")):
        entries.append(("trend", label, pre, replace(pre, beta=beta, gamma=10.0)))
    pre = SignalParams(sigma=1.0)
    for gamma, label in ((-2.0, "-2"), (3.0, "3"), (4.0, "4")):
        entries.append(("mean", label, pre, replace(pre, gamma=gamma)))
    pre = SignalParams(sigma=0.1)
    for sigma, label in ((0.2, "0.2"), (0.3, "0.3"), (0.4, "0.4")):
        entries.append(("variance", label, pre, replace(pre, sigma=sigma)))
    pre = SignalParams(omegas=(9 * pi / 75, 6 * pi / 75), alphas=(1.0, 1.0), sigma=0.1)
    for k1, k2 in ((3, 5), (9, 3), (9, 4)):
        label = f"({_pi_label(k1, 75)},{_pi_label(k2, 75)})"
        entries.append(("double", label, pre, replace(pre, omegas=(k1 * pi / 75, k2 * pi / 75))))
    return {
        f"{kind}/{label}": ChangeScenario(f"{kind}/{label}", pre, post, tau=300, T=600, kind=kind)
        for kind, label, pre, post in entries
    }


_CATALOG = _build_catalog()


def scenario_catalog() -> Dict[str, ChangeScenario]:
    """The 21 single-change scenarios (7 change types x 3 change sizes)."""
    return dict(_CATALOG)


def null_scenario(kind: str, T: int = 100_000) -> ChangeScenario:
    """Change-free stream following the pre-change process of ``kind``."""
    if kind not in CHANGE_TYPES:
        raise UnknownScenarioError(f"unknown change type {kind!r}; valid: {', '.join(CHANGE_TYPES)}")
    pre = next(s.pre for s in _CATALOG.values() if s.kind == kind)
    return ChangeScenario(f"{kind}/null", pre, pre, tau=None, T=T, kind=kind)


def lookup(name: str, T: Optional[int] = None) -> ChangeScenario:
    """Find a catalog scenario; ``pi`` is accepted for ``π`` and ``<kind>/null`` for nulls."""
    key = name.strip().replace("pi", "π").replace(" ", "")
    kind, _, label = key.partition("/")
    if label == "null":
        return null_scenario(kind, T or 100_000)
    if key not in _CATALOG:
        raise UnknownScenarioError(
            f"unknown scenario {name!r}; valid names: {', '.join(_CATALOG)} or <type>/null"
        )
    scenario = _CATALOG[key]
    return scenario if T is None else replace(scenario, T=T)


def catalog_json() -> str:
    return json.dumps([s.to_dict() for s in _CATALOG.values()], indent=2, ensure_ascii=False)
