"""Closed-form disturbance lower bounds and the data behind the bound figures."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from nonsig_lab.bell import generalized_chain
from nonsig_lab.errors import InputError
from nonsig_lab.quantum import quantum_value_closed_form, spectral_norm

TSIRELSON = 2 * math.sqrt(2)
_SLACK = 1e-12


def _check_eps(epsilon: float) -> None:
    if not 0.0 <= epsilon <= 0.5:
        raise InputError(f"epsilon={epsilon} outside [0, 1/2]")


def raw_bound_general(n, w, epsilon, beta, beta_max) -> float:
    """(w * 2 epsilon - (beta_max - beta)) / n without clamping."""
    _check_eps(epsilon)
    if beta > beta_max + _SLACK:
        raise InputError(f"beta={beta} exceeds beta_max={beta_max}")
    if n < 1:
        raise InputError(f"n={n} must be positive")
    return (w * 2 * epsilon - (beta_max - beta)) / n


def bound_general(n, w, epsilon, beta, beta_max) -> float:
    return max(0.0, raw_bound_general(n, w, epsilon, beta, beta_max))


def bound_chain(n, epsilon, beta) -> float:
    return bound_general(n, 2, epsilon, beta, 2 * n)


def raw_bound_gen_chain(n, k, epsilon) -> float:
    if not 1 <= k <= n / 2:
        raise InputError(f"generalized chain needs 1 <= k <= n/2, got n={n}, k={k}")
    _check_eps(epsilon)
    cos_sum = sum(math.cos((2 * j - 1) * math.pi / (2 * n)) for j in range(1, k + 1))
    return 4 * k * epsilon / n - 2 * (k - cos_sum)


def bound_gen_chain(n, k, epsilon) -> float:
    return max(0.0, raw_bound_gen_chain(n, k, epsilon))


def raw_bound_quantum_chsh(epsilon, beta) -> float:
    _check_eps(epsilon)
    if beta > TSIRELSON + _SLACK:
        raise InputError(f"beta={beta} exceeds the quantum maximum 2*sqrt(2)")
    if beta < 0:
        raise InputError(f"beta={beta} must be nonnegative")
    return 0.5 * (beta - math.sqrt(8 - 16 * epsilon**2))


def bound_quantum_chsh(epsilon, beta) -> float:
    return max(0.0, raw_bound_quantum_chsh(epsilon, beta))


def epsilon_threshold(n, w, beta, beta_max) -> float:
    """Smallest epsilon at which the general bound stops being vacuous (capped at 1/2)."""
    if w <= 0:
        raise InputError(f"relevance w={w} must be positive")
    return min(0.5, (beta_max - beta) / (2 * w))


def best_k(n: int, epsilon: float) -> tuple[int, float]:
    """k in [1, n/2] maximising the generalized-chain bound; ties go to the smaller k."""
    if n < 2:
        raise InputError(f"n={n} must be at least 2")
    best = (1, bound_gen_chain(n, 1, epsilon))
    for k in range(2, n // 2 + 1):
        value = bound_gen_chain(n, k, epsilon)
        if value > best[1]:
            best = (k, value)
    return best


def default_k(n: int) -> int:
    """k = floor(n^0.4): grows slower than sqrt(n), as the asymptotic argument requires."""
    return max(1, min(n // 2, int(math.floor(n**0.4))))


@dataclass
class BoundCurve:
    label: str
    epsilons: np.ndarray
    d_min: np.ndarray
    raw: np.ndarray
    meta: dict = field(default_factory=dict)


def epsilon_grid(step: float = 0.005) -> np.ndarray:
    if not 0 < step <= 0.5:
        raise InputError(f"epsilon step {step} must lie in (0, 0.5]")
    count = int(round(0.5 / step))
    grid = np.linspace(0.0, count * step, count + 1)
    if grid[-1] < 0.5 - 1e-12:
        grid = np.append(grid, 0.5)
    return np.minimum(grid, 0.5)


def _curve(label, grid, raw_fn, **meta) -> BoundCurve:
    raw = np.array([raw_fn(e) for e in grid])
    return BoundCurve(label, grid, np.maximum(raw, 0.0), raw, meta)


def figure_data(figure: int, eps_step: float = 0.005, n_list=None, k: int | None = None) -> list[BoundCurve]:
    """Curves for figure 1 (CHSH), 2 (chain) or 3 (chain vs. generalized chain)."""
    grid = epsilon_grid(eps_step)
    if figure == 1:
        return [
            _curve("ns_chsh", grid, lambda e: raw_bound_general(2, 2, e, TSIRELSON, 4),
                   n=2, w=2, beta=TSIRELSON, beta_max=4),
            _curve("quantum_chsh", grid, lambda e: raw_bound_quantum_chsh(e, TSIRELSON),
                   n=2, beta=TSIRELSON),
        ]
    if figure == 2:
        curves = []
        for n in n_list or (2, 4, 8, 16):
            beta = 2 * n * math.cos(math.pi / (2 * n))
            curves.append(_curve(
                f"chain_n{n:04d}", grid, lambda e, n=n, beta=beta: raw_bound_general(n, 2, e, beta, 2 * n),
                n=n, w=2, beta=beta, beta_max=2 * n,
                eps_threshold=epsilon_threshold(n, 2, beta, 2 * n),
            ))
        return curves
    if figure == 3:
        curves = []
        for n in n_list or range(100, 1001, 100):
            kk = k if k is not None else default_k(n)
            beta_chain = 2 * n * math.cos(math.pi / (2 * n))
            curves.append(_curve(
                f"chain_n{n:04d}", grid, lambda e, n=n, b=beta_chain: raw_bound_general(n, 2, e, b, 2 * n),
                n=n, k=1, beta=beta_chain,
            ))
            beta_q = n * spectral_norm(generalized_chain(n, kk).correlators)
            curves.append(_curve(
                f"genchain_n{n:04d}_k{kk:03d}", grid, lambda e, n=n, kk=kk: raw_bound_gen_chain(n, kk, e),
                n=n, k=kk, beta=beta_q, beta_closed_form=quantum_value_closed_form(n, kk),
            ))
        return curves
    raise InputError(f"unknown figure {figure!r}; expected 1, 2 or 3")


def fmt(value: float) -> str:
    return f"{value:.12g}"


def curves_to_csv(curves: list[BoundCurve]) -> str:
    """CSV with header ``epsilon,label,d_min,raw`` ordered by label, then epsilon."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["epsilon", "label", "d_min", "raw"])
    for curve in sorted(curves, key=lambda c: c.label):
        order = np.argsort(curve.epsilons, kind="stable")
        for i in order:
            writer.writerow([fmt(curve.epsilons[i]), curve.label, fmt(curve.d_min[i]), fmt(curve.raw[i])])
    return buf.getvalue()


def read_curves_csv(text: str) -> dict[str, dict[str, np.ndarray]]:
    """Parse :func:`curves_to_csv` output back into per-label arrays."""
    out: dict[str, dict[str, list]] = {}
    for row in csv.DictReader(io.StringIO(text)):
        entry = out.setdefault(row["label"], {"epsilon": [], "d_min": [], "raw": []})
        for key in ("epsilon", "d_min", "raw"):
            entry[key].append(float(row[key]))
    return {label: {k: np.array(v) for k, v in cols.items()} for label, cols in out.items()}
