"""Two-qubit simulations: gentle Kraus measurements, quantum boxes, spectral values.

Observables live in the X-Z plane of the Bloch sphere, O(theta) = sin(theta) X + cos(theta) Z,
and outcome 0 is the +1 eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from nonsig_lab.bell import BellFunctional, chsh, evaluate, generalized_chain_matrix
from nonsig_lab.box import Box, TripartiteBox, marginalize_tripartite
from nonsig_lab.errors import InputError, NumericalError, ValidationError

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
STATE_TOL = 1e-10


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 <= epsilon <= 0.5:
        raise InputError(f"epsilon={epsilon} outside [0, 1/2]")


def observable(theta: float) -> np.ndarray:
    return math.sin(theta) * SX + math.cos(theta) * SZ


def projector(theta: float, outcome: int) -> np.ndarray:
    return 0.5 * (I2 + (1 - 2 * outcome) * observable(theta))


def phi_plus() -> np.ndarray:
    """Density matrix of (|00> + |11>)/sqrt(2)."""
    v = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    return np.outer(v, v.conj())


def kraus_gentle(epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Kraus pair of the gentle measurement in the computational basis."""
    _check_epsilon(epsilon)
    hi, lo = math.sqrt(0.5 + epsilon), math.sqrt(0.5 - epsilon)
    return np.diag([hi, lo]).astype(complex), np.diag([lo, hi]).astype(complex)


def gentle_kraus_in_basis(theta: float, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """:func:`kraus_gentle` rotated into the eigenbasis of O(theta)."""
    _check_epsilon(epsilon)
    hi, lo = math.sqrt(0.5 + epsilon), math.sqrt(0.5 - epsilon)
    p0, p1 = projector(theta, 0), projector(theta, 1)
    return hi * p0 + lo * p1, lo * p0 + hi * p1


@dataclass(frozen=True)
class GentleReport:
    p_gentle: np.ndarray  # p(b^g = i)
    p_sharp: np.ndarray  # p(b_1 = j) without the gentle step
    p_sharp_after: np.ndarray  # p(b_1' = j) after the gentle step
    sharp_given_gentle: np.ndarray  # [i, j] = p(b_1' = j | b^g = i)
    gentle_given_sharp: np.ndarray  # [i, j] = p(b^g = i | b_1' = j)
    marginal_deviation: float
    conditional_deviation: float


def verify_gentle_assumptions(alpha: float, epsilon: float) -> GentleReport:
    """Gentle-then-sharp measurement of alpha|0> + sqrt(1-alpha^2)|1>.

    Checks that the sharp statistics are unchanged and that the gentle outcome
    agrees with the sharp one with probability 1/2 + epsilon.  Conditionals on
    zero-probability events are skipped.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"alpha={alpha} outside [0, 1]")
    _check_epsilon(epsilon)
    psi = np.array([alpha, math.sqrt(max(0.0, 1 - alpha**2))], dtype=complex)
    kraus = kraus_gentle(epsilon)
    sharp = [np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex)]

    p_sharp = np.array([np.real(psi.conj() @ P @ psi) for P in sharp])
    p_gentle = np.zeros(2)
    sharp_given_gentle = np.full((2, 2), np.nan)
    for i, E in enumerate(kraus):
        branch = E @ psi
        p_gentle[i] = np.real(branch.conj() @ branch)
        if p_gentle[i] > 1e-15:
            post = branch / math.sqrt(p_gentle[i])
            sharp_given_gentle[i] = [np.real(post.conj() @ P @ post) for P in sharp]
    joint = np.nan_to_num(sharp_given_gentle) * p_gentle[:, None]  # [i, j]
    p_sharp_after = joint.sum(axis=0)
    marginal_dev = float(np.abs(p_sharp_after - p_sharp).max())

    gentle_given_sharp = np.full((2, 2), np.nan)
    cond_dev = 0.0
    for j in range(2):
        if p_sharp[j] > 1e-15:
            gentle_given_sharp[:, j] = joint[:, j] / p_sharp[j]
            for i in range(2):
                target = 0.5 + epsilon if i == j else 0.5 - epsilon
                cond_dev = max(cond_dev, abs(gentle_given_sharp[i, j] - target))
    return GentleReport(
        p_gentle, p_sharp, p_sharp_after, sharp_given_gentle, gentle_given_sharp,
        marginal_dev, cond_dev,
    )


@dataclass(frozen=True)
class QuantumScenario:
    alice_angles: tuple
    bob_angles: tuple
    epsilon: float = 0.0
    state: np.ndarray = field(default_factory=phi_plus)

    def __post_init__(self):
        rho = np.array(self.state, dtype=complex)
        if rho.shape != (4, 4):
            raise ValidationError(f"state must be 4x4, got {rho.shape}")
        if np.abs(rho - rho.conj().T).max() > STATE_TOL:
            raise ValidationError("state is not Hermitian")
        if abs(np.trace(rho) - 1) > STATE_TOL:
            raise ValidationError("state does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -STATE_TOL:
            raise ValidationError("state is not positive semidefinite")
        _check_epsilon(self.epsilon)
        if not self.alice_angles or not self.bob_angles:
            raise InputError("each party needs at least one setting")
        rho.setflags(write=False)
        object.__setattr__(self, "state", rho)
        object.__setattr__(self, "alice_angles", tuple(float(t) for t in self.alice_angles))
        object.__setattr__(self, "bob_angles", tuple(float(t) for t in self.bob_angles))

    def with_epsilon(self, epsilon: float) -> "QuantumScenario":
        return QuantumScenario(self.alice_angles, self.bob_angles, epsilon, self.state)


def chain_angles(n: int) -> tuple[list[float], list[float]]:
    """Optimal X-Z plane angles for the chain family on |phi+>.

    Alice uses (x-1)pi/n and Bob (2y-3)pi/2n, which gives
    <A_{x+j} B_x> = cos((2j+1)pi/2n) and <A_x B_{x+j}> = cos((2j-1)pi/2n).
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InputError(f"chain_angles needs n >= 2, got {n!r}")
    alice = [(x - 1) * math.pi / n for x in range(1, n + 1)]
    bob = [(2 * y - 3) * math.pi / (2 * n) for y in range(1, n + 1)]
    return alice, bob


def tsirelson_scenario(epsilon: float = 0.0) -> QuantumScenario:
    """Angles reaching 2*sqrt(2) on :func:`nonsig_lab.bell.chsh`."""
    return QuantumScenario((0.0, math.pi / 2), (math.pi / 4, -math.pi / 4), epsilon)


def chain_scenario(n: int, epsilon: float = 0.0) -> QuantumScenario:
    alice, bob = chain_angles(n)
    return QuantumScenario(alice, bob, epsilon)


def _local_projectors(angles) -> np.ndarray:
    return np.array([[projector(t, o) for o in (0, 1)] for t in angles])


def quantum_box(scenario: QuantumScenario) -> Box:
    """Statistics of sharp measurements on both sides."""
    PA = _local_projectors(scenario.alice_angles)
    PB = _local_projectors(scenario.bob_angles)
    rho = scenario.state.reshape(2, 2, 2, 2)  # (i, j, k, l) = <ij|rho|kl>
    probs = np.real(np.einsum("xaki,yblj,ijkl->xyab", PA, PB, rho))
    return Box(probs)


def tripartite_quantum_box(scenario: QuantumScenario) -> TripartiteBox:
    """Gentle measurement of Bob's first observable followed by sharp measurements.

    Grace's Kraus pair acts in the eigenbasis of Bob's first setting.
    """
    PA = _local_projectors(scenario.alice_angles)
    PB = _local_projectors(scenario.bob_angles)
    kraus = gentle_kraus_in_basis(scenario.bob_angles[0], scenario.epsilon)
    rho = scenario.state
    n, m = len(scenario.alice_angles), len(scenario.bob_angles)
    probs = np.zeros((n, m, 2, 2, 2))
    for g, E in enumerate(kraus):
        K = np.kron(I2, E)
        post = (K @ rho @ K.conj().T).reshape(2, 2, 2, 2)
        probs[..., g] = np.real(np.einsum("xaki,yblj,ijkl->xyab", PA, PB, post))
    return TripartiteBox(probs)


def spectral_norm(matrix, rtol: float = 1e-12, max_iter: int = 1_000_000, seed: int = 0) -> float:
    """Largest singular value by power iteration on C^T C.

    Starts from the all-ones vector; a seeded random restart handles a start
    vector orthogonal to the dominant subspace.
    """
    C = np.asarray(matrix, dtype=float)
    if C.ndim != 2 or not np.any(C):
        raise InputError("spectral_norm needs a nonzero matrix")
    rng = np.random.default_rng(seed)
    v = np.ones(C.shape[1]) / math.sqrt(C.shape[1])
    prev = 0.0
    restarts = 0
    calm = 0
    for _ in range(max_iter):
        w = C.T @ (C @ v)
        lam = float(v @ w)
        norm = np.linalg.norm(w)
        if norm < 1e-300 or lam <= 0.0:
            if restarts > 10:
                raise NumericalError("power iteration stagnated")
            restarts += 1
            v = rng.standard_normal(C.shape[1])
            v /= np.linalg.norm(v)
            prev = 0.0
            continue
        v = w / norm
        if abs(lam - prev) <= rtol * lam:
            calm += 1
            if calm >= 3:
                return math.sqrt(lam)
        else:
            calm = 0
        prev = lam
    raise NumericalError(f"power iteration did not converge in {max_iter} steps")


def gen_chain_eigenvalues(n: int, k: int) -> np.ndarray:
    """Closed-form eigenvalues of the generalized-chain matrix, j = 0..n-1."""
    generalized_chain_matrix(n, k)  # validates (n, k)
    j = np.arange(n)
    omega = np.exp(-1j * math.pi * (2 * j + 1) / n)
    plus = sum(omega ** (n - i) for i in range(1, k + 2))
    minus = sum((omega ** (n - i) for i in range(n - k + 2, n + 1)), np.zeros(n))
    return (plus - minus) / omega ** (n - 1)


def quantum_value_closed_form(n: int, k: int = 1) -> float:
    """n csc(pi/2n) sin(k pi/n); equals 2n cos(pi/2n) for the chain (k=1)."""
    return n * math.sin(k * math.pi / n) / math.sin(math.pi / (2 * n))


def quantum_value(f: BellFunctional) -> float:
    """Upper bound n ||C|| on the quantum value (tight for the library functionals)."""
    if f.correlators is None:
        raise InputError("quantum_value requires a correlator-form functional")
    return f.n * spectral_norm(f.correlators)


@dataclass(frozen=True)
class MonogamyReport:
    beta: float
    gentle_correlator: float
    lhs: float
    holds: bool


def quantum_monogamy_check(
    scenario: QuantumScenario, functional: BellFunctional | None = None, tol: float = 1e-8
) -> MonogamyReport:
    """beta^2 + 4 <B_1^g B_1>^2 <= 8 on the gently measured CHSH-type scenario."""
    if len(scenario.alice_angles) != 2 or len(scenario.bob_angles) != 2:
        raise InputError("monogamy check needs a two-setting (CHSH) scenario")
    f = functional if functional is not None else chsh()
    if (f.n, f.m) != (2, 2):
        raise InputError("monogamy check needs a 2x2 functional")
    tri = tripartite_quantum_box(scenario)
    beta = evaluate(f, marginalize_tripartite(tri))
    corr = tri.gentle_correlator(1)
    lhs = beta**2 + 4 * corr**2
    return MonogamyReport(beta, corr, lhs, lhs <= 8 + tol)


def random_pure_state(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_scenario(rng: np.random.Generator, n: int, m: int, epsilon: float | None = None) -> QuantumScenario:
    eps = rng.uniform(0, 0.5) if epsilon is None else epsilon
    return QuantumScenario(
        tuple(rng.uniform(0, 2 * math.pi, n)),
        tuple(rng.uniform(0, 2 * math.pi, m)),
        eps,
        random_pure_state(rng),
    )
