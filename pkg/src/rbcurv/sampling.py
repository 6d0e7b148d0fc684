"""Monte Carlo verification of the projective moment identity and the
averaging equivalence between the sectional and pair curvature forms.

The unit-volume projective integrals used here have scale- and
phase-invariant integrands, so they equal expectations over the uniform
measure on the unit sphere of C^n, which is what gets sampled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import ChernTensor

GATE_FLOOR = 1e-4
_CHUNK = 131072


def moment_target(n: int, i: int, j: int, k: int, l: int) -> float:
    """Closed form (d_ij d_kl + d_il d_kj) / (n (n + 1)), indices 1-based."""
    return ((i == j) * (k == l) + (i == l) * (k == j)) / (n * (n + 1))


def sphere_sample(n: int, count: int, seed: int) -> np.ndarray:
    """Uniform unit vectors in C^n (rows), deterministic per seed.

    Complex Gaussian vectors normalized to the sphere; |w| = 1 within 1e-14.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    w = (rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n)))
    return w / np.linalg.norm(w, axis=1, keepdims=True)


@dataclass
class MomentEstimate:
    value: complex
    std_error: float
    samples: int
    seed: int
    target: float

    @property
    def gate(self) -> float:
        """Acceptance gate: three standard errors with an absolute floor."""
        return max(3.0 * self.std_error, GATE_FLOOR)

    @property
    def within_gate(self) -> bool:
        return abs(self.value - self.target) <= self.gate


def _stream_mean(values_of_chunk, count: int):
    """Deterministic chunked mean/variance accumulation."""
    total = 0.0 + 0.0j
    total_sq = 0.0
    done = 0
    while done < count:
        m = min(_CHUNK, count - done)
        vals = values_of_chunk(m)
        total += vals.sum()
        total_sq += float((np.abs(vals) ** 2).sum())
        done += m
    mean = total / count
    var = max(total_sq / count - abs(mean) ** 2, 0.0)
    std_error = float(np.sqrt(var / count))
    return mean, std_error


def fs_moment(n: int, i: int, j: int, k: int, l: int, count: int,
              seed: int) -> MomentEstimate:
    """Estimate E[w_i conj(w_j) w_k conj(w_l)] over the unit sphere of C^n
    (1-based indices) against the closed form."""
    for idx in (i, j, k, l):
        if not 1 <= idx <= n:
            raise ValueError(f"index {idx} out of range 1..{n}")
    rng = np.random.default_rng(seed)
    a, b, c, d = i - 1, j - 1, k - 1, l - 1

    def chunk(m: int) -> np.ndarray:
        w = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        return w[:, a] * w[:, b].conj() * w[:, c] * w[:, d].conj()

    mean, std_error = _stream_mean(chunk, count)
    return MomentEstimate(value=mean, std_error=std_error, samples=count,
                          seed=seed, target=moment_target(n, i, j, k, l))


@dataclass
class BergerReport:
    mc_value: float
    mc_imag_max: float
    std_error: float
    closed_form: float
    samples: int
    seed: int

    @property
    def diff_sigma(self) -> float:
        """Difference between the two values in standard-error units."""
        if self.std_error == 0.0:
            return 0.0 if self.mc_value == self.closed_form else np.inf
        return abs(self.mc_value - self.closed_form) / self.std_error

    @property
    def gate(self) -> float:
        return max(3.0 * self.std_error, GATE_FLOOR)

    @property
    def agrees(self) -> bool:
        return abs(self.mc_value - self.closed_form) <= self.gate


def berger_closed_form(t: ChernTensor, b) -> float:
    """Averaged value of the sectional form over the sphere:
    sum_{i,k} (R_{i ibar k kbar} + R_{i kbar k ibar}) b_i^2 b_k^2 / (n (n+1))."""
    b = np.asarray(b, dtype=float)
    n = t.n
    d1 = np.einsum("iikk->ik", t.R)
    d2 = np.einsum("ikki->ik", t.R)
    val = complex((b ** 2) @ (d1 + d2) @ (b ** 2)) / (n * (n + 1))
    return val.real


def berger_check(t: ChernTensor, b, count: int, seed: int) -> BergerReport:
    """Monte Carlo estimate of E[R(v, vbar, v, vbar)] with v = b o w over
    the unit sphere, against the closed pair-sum form."""
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise ValueError("weights must be nonnegative")
    n = t.n
    rng = np.random.default_rng(seed)
    imag_max = 0.0

    def chunk(m: int) -> np.ndarray:
        nonlocal imag_max
        w = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        v = w * b
        vals = np.einsum("ijkl,bi,bj,bk,bl->b", t.R, v, v.conj(), v, v.conj())
        imag_max = max(imag_max, float(np.abs(vals.imag).max(initial=0.0)))
        return vals.real.astype(complex)

    mean, std_error = _stream_mean(chunk, count)
    return BergerReport(mc_value=mean.real, mc_imag_max=imag_max,
                        std_error=std_error,
                        closed_form=berger_closed_form(t, b),
                        samples=count, seed=seed)
