"""Finite Markov chain analysis for stochastic profiles.

Recurrent classes, absorption probabilities, stationary laws and hitting
times. Entries are treated as exact for support purposes (``> 0``); derived
probabilities are compared with a 1e-9 slack.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ContractViolation, InputError, NumericError, PreconditionError
from .graph import Graph, _load, as_measure, components_of

ROW_TOL = 1e-12
PROB_TOL = 1e-9
RESIDUAL_TOL = 1e-10


def as_float_matrix(pi) -> np.ndarray:
    """Float copy of ``pi`` (accepts object arrays of ``Fraction``)."""
    a = np.asarray(pi)
    if a.dtype == object:
        a = np.vectorize(float, otypes=[float])(a)
    return np.array(a, dtype=float)


def stochastic_profile(g: Graph, pi, allow_loops: bool = False) -> np.ndarray:
    """Validate ``pi`` against ``g`` and return it as a float matrix.

    ``allow_loops`` admits diagonal mass, which PageRank-style profiles need.
    """
    a = as_float_matrix(pi)
    n = g.n
    if a.shape != (n, n):
        raise InputError(f"pi has shape {a.shape}, expected ({n}, {n})", field="pi")
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise InputError("pi has negative or non-finite entries", field="pi")
    for i in range(n):
        if abs(a[i].sum() - 1.0) > ROW_TOL:
            raise InputError(f"row {i} of pi sums to {a[i].sum()!r}, not 1", field="pi")
        for j in np.flatnonzero(a[i] > 0):
            j = int(j)
            if j == i and allow_loops:
                continue
            if not g.has_edge(i, j):
                raise InputError(f"pi[{i}][{j}] > 0 but ({i}, {j}) is not an edge", field="pi")
    return a


def parse_stochastic_profile(g: Graph, text) -> np.ndarray:
    """Parse the dense ``{"pi": [[...]]}`` or sparse ``{"rows": [...]}`` form."""
    doc = _load(text)
    if not isinstance(doc, dict):
        raise InputError("profile document must be a JSON object", field="pi")
    n = g.n
    if "pi" in doc:
        rows = doc["pi"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise InputError("'pi' must be a list of rows", field="pi")
        try:
            a = np.array([[float(x) for x in r] for r in rows], dtype=float)
        except (TypeError, ValueError) as exc:
            raise InputError(f"'pi' has a non-numeric entry: {exc}", field="pi") from exc
        if a.shape != (n, n):
            raise InputError(f"pi has shape {a.shape}, expected ({n}, {n})", field="pi")
        return stochastic_profile(g, a)
    if "rows" in doc:
        a = np.zeros((n, n))
        seen = set()
        for r in doc["rows"]:
            if not isinstance(r, dict) or not {"i", "targets", "probs"} <= r.keys():
                raise InputError("each sparse row needs 'i', 'targets' and 'probs'", field="rows")
            i = r["i"]
            if not isinstance(i, int) or not 0 <= i < n or i in seen:
                raise InputError(f"row index {i!r} is out of range or repeated", field="rows")
            if len(r["targets"]) != len(r["probs"]):
                raise InputError(f"row {i}: 'targets' and 'probs' differ in length", field="rows")
            seen.add(i)
            for t, p in zip(r["targets"], r["probs"]):
                if not isinstance(t, int) or not 0 <= t < n:
                    raise InputError(f"row {i}: target {t!r} out of range", field="rows")
                a[i, t] += float(p)
        if len(seen) != n:
            missing = sorted(set(range(n)) - seen)
            raise InputError(f"sparse profile is missing rows {missing}", field="rows")
        return stochastic_profile(g, a)
    raise InputError("profile document needs 'pi' or 'rows'", field="pi")


def support_adjacency(pi: np.ndarray) -> list[list[int]]:
    return [[int(j) for j in np.flatnonzero(row > 0)] for row in pi]


@dataclass(frozen=True)
class RecurrentStructure:
    """Recurrent classes of a chain and where each vertex gets absorbed.

    ``absorb[l, j]`` is the probability that the chain started at ``j``
    is eventually trapped in ``classes[l]``.
    """

    classes: list[frozenset]
    closures: list[frozenset]
    residual: frozenset
    absorb: np.ndarray
    class_mass: np.ndarray

    @property
    def r(self) -> int:
        return len(self.classes)

    @property
    def transient(self) -> frozenset:
        rec = frozenset().union(*self.classes)
        return frozenset(range(self.absorb.shape[1])) - rec

    def class_of(self, i: int) -> int | None:
        for l, c in enumerate(self.classes):
            if i in c:
                return l
        return None


def recurrent_classes(pi: np.ndarray) -> list[frozenset]:
    """Sink strongly connected components of the support digraph."""
    comps = components_of(len(pi), support_adjacency(pi))
    return [comps.components[k] for k in comps.sinks()]


def absorption_probabilities(pi, classes) -> np.ndarray:
    """r x n matrix of eventual absorption probabilities.

    Solves ``(I - Q) h = b`` on the transient vertices, where ``Q`` is the
    transient block and ``b`` the one-step mass into the class.
    """
    pi = as_float_matrix(pi)
    n = len(pi)
    r = len(classes)
    out = np.zeros((r, n))
    rec = set()
    for l, c in enumerate(classes):
        idx = sorted(c)
        out[l, idx] = 1.0
        rec.update(idx)
    trans = [j for j in range(n) if j not in rec]
    if not trans or r == 0:
        return out
    Q = pi[np.ix_(trans, trans)]
    B = np.stack([pi[trans][:, sorted(c)].sum(axis=1) for c in classes], axis=1)
    A = np.eye(len(trans)) - Q
    try:
        H = np.linalg.solve(A, B)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"absorption system is singular: {exc}") from exc
    resid = np.abs(A @ H - B).max()
    if resid > 1e-8:
        raise NumericError(f"absorption solve residual {resid:.3e} too large")
    out[:, trans] = H.T
    return out


def recurrent_structure(pi, mu=None) -> RecurrentStructure:
    """Classes, closures, residual transient set and per-class mass."""
    pi = as_float_matrix(pi)
    n = len(pi)
    classes = recurrent_classes(pi)
    absorb = absorption_probabilities(pi, classes)
    closures = [frozenset(int(j) for j in np.flatnonzero(absorb[l] >= 1 - PROB_TOL)) for l in range(len(classes))]
    residual = frozenset(int(j) for j in range(n) if absorb[:, j].max() < 1 - PROB_TOL)
    m = np.array(as_measure(mu, n).as_floats())
    class_mass = absorb @ m
    return RecurrentStructure(classes, closures, residual, absorb, class_mass)


def _check_irreducible(pi: np.ndarray):
    comps = components_of(len(pi), support_adjacency(pi))
    if len(comps.components) != 1:
        raise ContractViolation(
            f"restriction is reducible ({len(comps.components)} strongly connected components)"
        )


def stationary_distribution(pi) -> np.ndarray:
    """Unique invariant law of an irreducible chain.

    The last balance equation is swapped for the normalization constraint.
    """
    pi = as_float_matrix(pi)
    n = len(pi)
    _check_irreducible(pi)
    A = (np.eye(n) - pi).T
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    rho = np.linalg.solve(A, b)
    resid = np.abs(rho @ pi - rho).max()
    if resid >= RESIDUAL_TOL:
        raise NumericError(f"stationary residual {resid:.3e} exceeds {RESIDUAL_TOL}")
    return rho


def restrict(pi, vertices) -> tuple[np.ndarray, list[int]]:
    idx = sorted(vertices)
    pi = as_float_matrix(pi)
    return pi[np.ix_(idx, idx)], idx


def class_stationary(pi, cls) -> np.ndarray:
    """Length-n vector: stationary law of the class, zero elsewhere."""
    sub, idx = restrict(pi, cls)
    out = np.zeros(len(as_float_matrix(pi)))
    out[idx] = stationary_distribution(sub)
    return out


def expected_hitting_times(pi, target: int) -> np.ndarray:
    """Mean time to reach ``target`` (first return when starting there).

    Only vertices that reach ``target`` with probability one get a finite
    value; the others are NaN. A transient target is out of domain.
    """
    pi = as_float_matrix(pi)
    n = len(pi)
    if not 0 <= target < n:
        raise PreconditionError(f"target {target} is not a vertex")
    classes = recurrent_classes(pi)
    home = [c for c in classes if target in c]
    if not home:
        raise PreconditionError(f"target {target} is transient; return is not certain")
    absorb = absorption_probabilities(pi, classes)
    l = classes.index(home[0])
    scope = [j for j in range(n) if absorb[l, j] >= 1 - PROB_TOL]
    others = [j for j in scope if j != target]
    out = np.full(n, np.nan)
    h = np.zeros(n)
    if others:
        A = np.eye(len(others)) - pi[np.ix_(others, others)]
        sol = np.linalg.solve(A, np.ones(len(others)))
        h[others] = sol
        out[others] = sol
    out[target] = 1.0 + pi[target, scope] @ h[scope]
    return out


def exact_matrix(pi) -> np.ndarray:
    """Object array of ``Fraction`` (floats converted exactly)."""
    a = np.asarray(pi)
    return np.array([[Fraction(x) for x in row] for row in a], dtype=object)
