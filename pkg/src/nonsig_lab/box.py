"""Bipartite and tripartite no-signaling boxes with binary outputs.

Probabilities are stored densely as ``probs[x, y, a, b]`` (tripartite boxes add a
trailing ``g`` axis for Grace's single gentle observable).  Settings are 0-based
in storage; every public function that takes a setting uses 1-based numbering,
so ``x=1`` is Alice's first observable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from nonsig_lab.errors import InputError, ValidationError

CLAMP_TOL = 1e-12
NORM_TOL = 1e-9
DEGENERATE_PROB = 1e-12


def _check_table(probs: np.ndarray, tol: float, label: str) -> np.ndarray:
    if not np.all(np.isfinite(probs)):
        raise ValidationError(f"{label}: non-finite entry")
    low = probs.min()
    if low < -CLAMP_TOL:
        idx = np.unravel_index(np.argmin(probs), probs.shape)
        raise ValidationError(f"{label}{list(idx)}: negative probability {low:.3e}")
    high = probs.max()
    if high > 1 + CLAMP_TOL:
        idx = np.unravel_index(np.argmax(probs), probs.shape)
        raise ValidationError(f"{label}{list(idx)}: probability {high:.3e} exceeds 1")
    probs = np.clip(probs, 0.0, 1.0)
    n, m = probs.shape[:2]
    sums = probs.reshape(n, m, -1).sum(axis=2)
    bad = np.abs(sums - 1.0) > tol
    if bad.any():
        x, y = np.argwhere(bad)[0]
        raise ValidationError(
            f"{label}[{x}][{y}]: probabilities sum to {sums[x, y]:.12g}, expected 1"
        )
    return probs


@dataclass(frozen=True)
class Box:
    """Conditional distribution p(a,b|x,y), shape ``(n, m, 2, 2)``."""

    probs: np.ndarray
    tol: float = field(default=NORM_TOL, compare=False, repr=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 4 or probs.shape[2:] != (2, 2) or min(probs.shape[:2]) < 1:
            raise ValidationError(f"probs: expected shape (n, m, 2, 2), got {probs.shape}")
        probs = _check_table(probs, self.tol, "probs")
        alice = probs.sum(axis=3)  # (x, y, a)
        dev_a = np.abs(alice - alice[:, :1, :]).max()
        if dev_a > self.tol:
            raise ValidationError(f"probs: Alice marginal depends on y (deviation {dev_a:.3e})")
        bob = probs.sum(axis=2)  # (x, y, b)
        dev_b = np.abs(bob - bob[:1, :, :]).max()
        if dev_b > self.tol:
            raise ValidationError(f"probs: Bob marginal depends on x (deviation {dev_b:.3e})")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def m(self) -> int:
        return self.probs.shape[1]

    def alice_marginal(self) -> np.ndarray:
        """p(a|x) as an ``(n, 2)`` array, read off Bob's first setting."""
        return self.probs[:, 0].sum(axis=2)

    def bob_marginal(self) -> np.ndarray:
        return self.probs[0].sum(axis=1)

    def correlators(self) -> np.ndarray:
        """Matrix of <A_x B_y> for all settings."""
        return np.einsum("xyab,ab->xy", self.probs, _SIGN)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "probs": self.probs.tolist()}


@dataclass(frozen=True)
class TripartiteBox:
    """p(a,b,g|x,y) where Grace (outcome g) has a single input."""

    probs: np.ndarray
    tol: float = field(default=NORM_TOL, compare=False, repr=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 5 or probs.shape[2:] != (2, 2, 2) or min(probs.shape[:2]) < 1:
            raise ValidationError(f"probs: expected shape (n, m, 2, 2, 2), got {probs.shape}")
        probs = _check_table(probs, self.tol, "probs")
        no_alice = probs.sum(axis=2)  # (x, y, b, g)
        dev_a = np.abs(no_alice - no_alice[:1]).max()
        if dev_a > self.tol:
            raise ValidationError(f"probs: Bob-Grace marginal depends on x (deviation {dev_a:.3e})")
        no_bob = probs.sum(axis=3)  # (x, y, a, g)
        dev_b = np.abs(no_bob - no_bob[:, :1]).max()
        if dev_b > self.tol:
            raise ValidationError(f"probs: Alice-Grace marginal depends on y (deviation {dev_b:.3e})")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def m(self) -> int:
        return self.probs.shape[1]

    def gentle_correlator(self, y: int = 1) -> float:
        """<B_y^g B_y>: correlation between Grace's output and Bob's output at setting ``y``."""
        _check_setting(y, self.m, "y")
        bg = self.probs[0, y - 1].sum(axis=0)  # (b, g)
        return float(np.sum(bg * _SIGN))

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "probs": self.probs.tolist()}


_SIGN = np.array([[1.0, -1.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class DisturbanceReport:
    """Per-setting disturbances ``per_setting[a, x, y]`` and their weighted total.

    The excluded (gently measured) setting's column is left at zero.
    """

    per_setting: np.ndarray
    total: float
    excluded_setting: int = 1


def _check_setting(value: int, count: int, name: str) -> None:
    if not isinstance(value, (int, np.integer)) or not 1 <= value <= count:
        raise InputError(f"{name}={value!r} out of range 1..{count}")


def _check_outcome(value: int, name: str) -> None:
    if value not in (0, 1):
        raise InputError(f"{name}={value!r} must be 0 or 1")


def make_pr_box() -> Box:
    """Popescu-Rohrlich box: a XOR b = (x-1)(y-1) with uniform marginals."""
    probs = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                probs[x, y, a, a ^ (x * y)] = 0.5
    return Box(probs)


def uniform_box(n: int, m: int) -> Box:
    return Box(np.full((n, m, 2, 2), 0.25))


def deterministic_box(alice_outputs, bob_outputs) -> Box:
    """Local deterministic box: Alice outputs ``alice_outputs[x]``, Bob ``bob_outputs[y]``."""
    n, m = len(alice_outputs), len(bob_outputs)
    probs = np.zeros((n, m, 2, 2))
    for x, a in enumerate(alice_outputs):
        for y, b in enumerate(bob_outputs):
            probs[x, y, a, b] = 1.0
    return Box(probs)


def xor_box(parity) -> Box:
    """Box with uniform marginals and a XOR b = parity[x][y] (always no-signaling)."""
    parity = np.asarray(parity, dtype=int)
    n, m = parity.shape
    probs = np.zeros((n, m, 2, 2))
    for x in range(n):
        for y in range(m):
            for a in range(2):
                probs[x, y, a, a ^ parity[x, y]] = 0.5
    return Box(probs)


def mix(boxes, weights) -> Box:
    weights = np.asarray(weights, dtype=float)
    probs = sum(w * b.probs for w, b in zip(weights, boxes))
    return Box(probs)


def flip_bob_outputs(box: Box, y: int) -> Box:
    """Relabel Bob's outcome b -> 1-b at setting ``y`` (1-based)."""
    _check_setting(y, box.m, "y")
    probs = np.array(box.probs)
    probs[:, y - 1] = probs[:, y - 1, :, ::-1]
    return Box(probs)


def product_extension(box: Box, grace=(0.5, 0.5)) -> TripartiteBox:
    """Append an independent Grace with output distribution ``grace``."""
    return TripartiteBox(box.probs[..., None] * np.asarray(grace, dtype=float))


def condition_on_alice(box: Box, x: int, a: int) -> np.ndarray:
    """Bob's conditional table p(b|y, a, x) as an ``(m, 2)`` array.

    When p(a|x) vanishes the conditional is undefined; the uniform distribution
    is returned instead (it is weighted by zero in every disturbance sum).
    """
    _check_setting(x, box.n, "x")
    _check_outcome(a, "a")
    joint = box.probs[x - 1, :, a, :]  # (y, b)
    pa = joint.sum(axis=1)
    if pa[0] < DEGENERATE_PROB:
        return np.full((box.m, 2), 0.5)
    return joint / pa[:, None]


def correlator(box: Box, x: int, y: int) -> float:
    """<A_x B_y> = sum (-1)^(a+b) p(a,b|x,y)."""
    _check_setting(x, box.n, "x")
    _check_setting(y, box.m, "y")
    return float(np.sum(box.probs[x - 1, y - 1] * _SIGN))


def marginalize_tripartite(tri: TripartiteBox) -> Box:
    """Sum out Grace's output."""
    if not isinstance(tri, TripartiteBox):
        raise ValidationError("expected a TripartiteBox")
    return Box(tri.probs.sum(axis=4), tol=tri.tol)


def disturbance_total(
    before: Box, after: Box, excluded_setting: int = 1, marginal_tol: float = 1e-7
) -> DisturbanceReport:
    """Average total disturbance of Bob's observables other than ``excluded_setting``.

    Alice's inputs are taken as equiprobable and her outcome weights p(a|x)
    come from ``before``.
    """
    if before.probs.shape != after.probs.shape:
        raise InputError(
            f"dimension mismatch: {before.probs.shape[:2]} vs {after.probs.shape[:2]}"
        )
    n, m = before.n, before.m
    _check_setting(excluded_setting, m, "excluded_setting")
    pa = before.alice_marginal()
    dev = np.abs(pa - after.alice_marginal()).max()
    if dev > marginal_tol:
        raise InputError(f"Alice marginals differ by {dev:.3e}")

    per = np.zeros((2, n, m))
    for x in range(1, n + 1):
        for a in range(2):
            cond = condition_on_alice(before, x, a)
            cond_t = condition_on_alice(after, x, a)
            per[a, x - 1] = np.abs(cond - cond_t).sum(axis=1)
    per[:, :, excluded_setting - 1] = 0.0
    weights = pa.T / n  # (a, x)
    total = float(np.sum(weights[:, :, None] * per))
    return DisturbanceReport(per_setting=per, total=total, excluded_setting=excluded_setting)


# -- JSON files ---------------------------------------------------------------


def _load_json(path) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top-level value must be an object")
    return data


def _probs_from_dict(data: dict, tail: tuple, source: str) -> np.ndarray:
    for key in ("n", "m", "probs"):
        if key not in data:
            raise ValidationError(f"{source}: missing field '{key}'")
    n, m = data["n"], data["m"]
    if not isinstance(n, int) or not isinstance(m, int) or n < 1 or m < 1:
        raise ValidationError(f"{source}: fields 'n' and 'm' must be positive integers")
    try:
        probs = np.array(data["probs"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{source}: field 'probs' is not a rectangular numeric array") from exc
    expected = (n, m) + tail
    if probs.shape != expected:
        raise ValidationError(f"{source}: field 'probs' has shape {probs.shape}, expected {expected}")
    return probs


def box_from_dict(data: dict, source: str = "box") -> Box:
    probs = _probs_from_dict(data, (2, 2), source)
    try:
        return Box(probs)
    except ValidationError as exc:
        raise ValidationError(f"{source}: field {exc}") from exc


def tripartite_from_dict(data: dict, source: str = "box") -> TripartiteBox:
    probs = _probs_from_dict(data, (2, 2, 2), source)
    try:
        return TripartiteBox(probs)
    except ValidationError as exc:
        raise ValidationError(f"{source}: field {exc}") from exc


def read_box(path) -> Box:
    return box_from_dict(_load_json(path), str(path))


def read_tripartite(path) -> TripartiteBox:
    return tripartite_from_dict(_load_json(path), str(path))


def write_box(box: Box | TripartiteBox, path) -> None:
    Path(path).write_text(json.dumps(box.to_dict(), indent=1) + "\n")
