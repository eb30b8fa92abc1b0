"""Bell functionals on binary-output boxes: CHSH, chain and generalized chain."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from nonsig_lab.box import Box
from nonsig_lab.errors import InputError, ResourceError, UnsupportedFormError, ValidationError

MAX_ENUM_SETTINGS = 24
_SIGN = np.array([[1.0, -1.0], [-1.0, 1.0]])
_CHUNK_BITS = 16


@dataclass(frozen=True)
class BellFunctional:
    """Coefficients ``coeffs[x, y, a, b]`` of beta = sum c(a,b,x,y) p(a,b|x,y).

    Correlation-form functionals also carry the ``n x m`` matrix ``correlators``
    with ``coeffs[x, y, a, b] = correlators[x, y] * (-1)**(a + b)``.
    """

    coeffs: np.ndarray
    correlators: np.ndarray | None = None
    rescaled: bool = False
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 4 or coeffs.shape[2:] != (2, 2):
            raise ValidationError(f"coeffs: expected shape (n, m, 2, 2), got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValidationError("coeffs: non-finite entry")
        if self.correlators is not None:
            corr = np.array(self.correlators, dtype=float)
            if corr.shape != coeffs.shape[:2]:
                raise ValidationError("correlators: shape does not match coeffs")
            if not np.array_equal(coeffs, corr[:, :, None, None] * _SIGN):
                raise ValidationError("coeffs are not the correlation form of the given matrix")
            corr.setflags(write=False)
            object.__setattr__(self, "correlators", corr)
        if self.rescaled and abs(np.abs(coeffs).max() - 1.0) > 1e-12:
            raise ValidationError("rescaled functional must have max |c| = 1")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_correlators(cls, matrix, name: str = "custom") -> "BellFunctional":
        corr = np.array(matrix, dtype=float)
        if corr.ndim != 2:
            raise ValidationError("correlator matrix must be two-dimensional")
        coeffs = corr[:, :, None, None] * _SIGN
        peak = np.abs(corr).max() if corr.size else 0.0
        return cls(coeffs, corr, rescaled=bool(peak == 1.0), name=name)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def m(self) -> int:
        return self.coeffs.shape[1]

    @property
    def algebraic_max(self) -> float:
        """Largest value over all (not necessarily no-signaling) tables."""
        return float(self.coeffs.max(axis=(2, 3)).sum())

    def to_dict(self) -> dict:
        if self.correlators is not None:
            return {"n": self.n, "m": self.m, "correlators": self.correlators.tolist()}
        return {"n": self.n, "m": self.m, "coeffs": self.coeffs.tolist()}


def chsh() -> BellFunctional:
    return BellFunctional.from_correlators([[1, 1], [1, -1]], name="chsh")


def chain(n: int) -> BellFunctional:
    """Braunstein-Caves chain: sum_k <A_k B_k> + <A_k B_{k+1}>, closed by <A_n B_n> - <A_n B_1>."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InputError(f"chain needs n >= 2, got {n!r}")
    corr = np.zeros((n, n))
    for k in range(n - 1):
        corr[k, k] = 1
        corr[k, k + 1] = 1
    corr[n - 1, n - 1] = 1
    corr[n - 1, 0] = -1
    return BellFunctional.from_correlators(corr, name=f"chain{n}")


def generalized_chain_matrix(n: int, k: int) -> np.ndarray:
    """Banded sign-flipped circulant with 2k nonzeros per row.

    Row 1 is +1 on columns 1..k+1 and -1 on columns n-k+2..n; each later row is
    the previous one shifted right, negating the entry that wraps to column 1.
    """
    if not isinstance(n, (int, np.integer)) or not isinstance(k, (int, np.integer)):
        raise InputError("n and k must be integers")
    if k < 1 or 2 * k > n:
        raise InputError(f"generalized chain needs 1 <= k <= n/2, got n={n}, k={k}")
    row = np.zeros(n)
    row[: k + 1] = 1
    row[n - k + 1 :] = -1
    rows = [row]
    for _ in range(n - 1):
        prev = rows[-1]
        nxt = np.roll(prev, 1)
        nxt[0] = -prev[-1]
        rows.append(nxt)
    return np.array(rows)


def generalized_chain(n: int, k: int) -> BellFunctional:
    return BellFunctional.from_correlators(
        generalized_chain_matrix(n, k), name=f"genchain{n}_{k}"
    )


def _check_dims(f: BellFunctional, box: Box) -> None:
    if (f.n, f.m) != (box.n, box.m):
        raise InputError(f"functional is {f.n}x{f.m} but box is {box.n}x{box.m}")


def evaluate(f: BellFunctional, box: Box) -> float:
    _check_dims(f, box)
    return float(np.sum(f.coeffs * box.probs))


def rescale(f: BellFunctional) -> BellFunctional:
    """Divide by max |c| so that every coefficient lies in [-1, 1]."""
    peak = np.abs(f.coeffs).max()
    if peak == 0:
        raise InputError("cannot rescale the zero functional")
    corr = None if f.correlators is None else f.correlators / peak
    return BellFunctional(f.coeffs / peak, corr, rescaled=True, name=f.name)


def _default_workers() -> int:
    env = os.environ.get("NONSIG_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _best_in_range(corr: np.ndarray, start: int, stop: int) -> float:
    m = corr.shape[1]
    # Bob's first sign is fixed to +1: b and -b give the same value.
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(m - 1, dtype=np.int64)) & 1
    signs = np.ones((idx.size, m))
    signs[:, 1:] = 1 - 2 * bits
    return float(np.abs(signs @ corr.T).sum(axis=1).max())


def classical_value(f: BellFunctional, workers: int | None = None) -> float:
    """Local deterministic optimum of a correlation functional.

    Enumerates Bob's sign vectors; Alice answers each row with the sign of
    its inner sum.  Ranges of Bob assignments can be split across threads.
    """
    if f.correlators is None:
        raise UnsupportedFormError("classical_value requires a correlator-form functional")
    m = f.m
    if m > MAX_ENUM_SETTINGS:
        raise ResourceError(f"m={m} exceeds enumeration limit {MAX_ENUM_SETTINGS}")
    corr = np.asarray(f.correlators)
    total = 1 << (m - 1)
    chunk = 1 << _CHUNK_BITS
    ranges = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    workers = workers or _default_workers()
    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            best = pool.map(lambda r: _best_in_range(corr, *r), ranges)
            return max(best)
    return max(_best_in_range(corr, s, e) for s, e in ranges)


def functional_from_dict(data: dict, source: str = "functional") -> BellFunctional:
    if "correlators" in data:
        f = BellFunctional.from_correlators(data["correlators"])
    elif "coeffs" in data:
        f = BellFunctional(np.array(data["coeffs"], dtype=float))
    else:
        raise ValidationError(f"{source}: needs field 'correlators' or 'coeffs'")
    for key, size in (("n", f.n), ("m", f.m)):
        if key in data and data[key] != size:
            raise ValidationError(f"{source}: field '{key}'={data[key]} but table has {size}")
    return f


def read_functional(path) -> BellFunctional:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return functional_from_dict(data, str(path))


def library_functionals(n: int, m: int) -> list[BellFunctional]:
    """Every built-in functional that fits an ``n x m`` scenario."""
    out = []
    if n == m == 2:
        out.append(chsh())
    if n == m and n >= 2:
        out.append(chain(n))
        out.extend(generalized_chain(n, k) for k in range(2, n // 2 + 1))
    return out
