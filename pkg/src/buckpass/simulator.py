"""Monte Carlo realization of the buck process.

Every replica owns a Philox stream keyed by ``(seed, replica)``, so results
are bit-identical across runs and independent of replica order. The inner
loop is a numba kernel fed with pre-drawn uniforms in chunks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .chain import stochastic_profile
from .det_game import det_cost_vector
from .errors import InputError, PreconditionError
from .graph import Graph, as_measure, check_profile
from .instances import k3_mixed_profile, lift
from .stoch_game import stoch_cost_vector
from .trees import exact_stationary_via_trees

CHUNK = 1 << 18
Z_PASS = 3.0
Z_FLAG = 4.0


@dataclass(frozen=True)
class SimConfig:
    T: int
    replicas: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.T < 1:
            raise InputError("horizon T must be at least 1", field="T")
        if self.replicas < 1:
            raise InputError("replicas must be at least 1", field="replicas")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer", field="seed")


@numba.njit(cache=True, nogil=True)
def _run_chunk(cum, x, u, counts):
    n = cum.shape[0]
    for t in range(u.shape[0]):
        v = u[t]
        row = cum[x]
        k = 0
        while k < n - 1 and v >= row[k]:
            k += 1
        x = k
        counts[x] += 1
    return x


def _cumulative(pi: np.ndarray) -> np.ndarray:
    cum = np.cumsum(pi, axis=1)
    # guard against rows summing to 1 - eps
    for i in range(len(pi)):
        last = np.flatnonzero(pi[i] > 0).max()
        cum[i, last:] = 1.0 + 1e-12
    return cum


def replica_generator(seed: int, replica: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, replica])))


def run_replica(pi: np.ndarray, mu_arr: np.ndarray, T: int, seed: int, replica: int) -> np.ndarray:
    """Frequencies of each vertex over t = 1..T for one replica."""
    rng = replica_generator(seed, replica)
    cum = _cumulative(pi)
    x0 = int(np.searchsorted(np.cumsum(mu_arr), rng.random(), side="right"))
    x = min(x0, len(pi) - 1)
    counts = np.zeros(len(pi), dtype=np.int64)
    done = 0
    while done < T:
        m = min(CHUNK, T - done)
        x = _run_chunk(cum, x, rng.random(m), counts)
        done += m
    return counts / T


@dataclass
class SimResult:
    empirical: np.ndarray
    analytic: np.ndarray
    standard_error: np.ndarray
    z_scores: np.ndarray
    per_replica: np.ndarray
    flagged: list[int]

    @property
    def within_3se(self) -> bool:
        return bool(np.all(np.abs(self.z_scores) < Z_PASS))

    def to_json(self) -> dict:
        return {
            "empirical": self.empirical.tolist(),
            "analytic": self.analytic.tolist(),
            "standard_error": self.standard_error.tolist(),
            "z_scores": self.z_scores.tolist(),
            "flagged": self.flagged,
        }


def _as_matrix(g: Graph, pi_or_s) -> np.ndarray:
    a = np.asarray(pi_or_s)
    if a.ndim == 1:
        return lift(check_profile(g, [int(v) for v in a]), g.n)
    return stochastic_profile(g, a)


def z_scores(emp: np.ndarray, analytic: np.ndarray, se: np.ndarray) -> np.ndarray:
    diff = emp - analytic
    with np.errstate(divide="ignore", invalid="ignore"):
        z = diff / se
    # zero spread: exact agreement scores 0, anything else is infinitely off
    z = np.where(se > 0, z, np.where(np.abs(diff) <= 1e-12, 0.0, np.inf))
    return z


def simulate(g: Graph, mu, pi_or_s, cfg: SimConfig) -> SimResult:
    """Empirical holding frequencies averaged over replicas, with z-scores.

    The standard error is the across-replica standard deviation over
    sqrt(replicas) (NaN for a single replica). Components with
    3 <= |z| < 4 are listed in ``flagged``.
    """
    pi = _as_matrix(g, pi_or_s)
    mu_arr = np.array(as_measure(mu, g.n).as_floats())
    reps = np.array([run_replica(pi, mu_arr, cfg.T, cfg.seed, r) for r in range(cfg.replicas)])
    emp = reps.mean(axis=0)
    if cfg.replicas > 1:
        se = reps.std(axis=0, ddof=1) / np.sqrt(cfg.replicas)
    else:
        se = np.full(g.n, np.nan)
    analytic = stoch_cost_vector(g, mu, pi).costs
    z = z_scores(emp, analytic, se)
    flagged = [i for i in range(g.n) if Z_PASS <= abs(z[i]) < Z_FLAG]
    return SimResult(emp, analytic, se, z, reps, flagged)


@dataclass(frozen=True)
class MixedExtensionReport:
    mixed_cost: Fraction
    stochastic_cost: Fraction

    @property
    def difference(self) -> Fraction:
        return self.mixed_cost - self.stochastic_cost


def mixed_extension_check(g: Graph, mu=None) -> MixedExtensionReport:
    """Randomizing over pure profiles is not the same game as a random profile.

    On K_3, vertex 0 mixes evenly between 1 and 2 while 1 -> 0 and 2 -> 1.
    The average of the two pure costs of vertex 0 is compared with its long-run
    frequency in the stochastic profile, both exact.
    """
    if g.n != 3 or g.num_profiles() != 8:
        raise PreconditionError("the mixed-extension check is defined on K_3")
    mixed = (det_cost_vector(g, mu, (1, 0, 1))[0] + det_cost_vector(g, mu, (2, 0, 1))[0]) / 2
    stoch = exact_stationary_via_trees(k3_mixed_profile(exact=True), {0, 1, 2})[0]
    if mixed == stoch:
        raise PreconditionError("mixed extension unexpectedly coincides with the stochastic cost")
    return MixedExtensionReport(mixed, stoch)
