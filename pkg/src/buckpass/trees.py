"""Tree volumes of a stochastic matrix.

For a closed single-class sub-chain, ``Omega_i`` is the total weight of the
spanning trees rooted at ``i`` (weight = product of transition entries along
child -> parent edges). It equals the principal minor ``det L_(i|i)`` of the
Laplacian ``L = I - pi`` and, summed over ``i``, the product of the nonzero
eigenvalues of ``L``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chain import as_float_matrix, recurrent_classes
from .errors import CapExceededError, ContractViolation, NumericError, PreconditionError
from .graph import TREE_ENUMERATION_CAP, decompose, enumerate_rooted_trees

AGREE_RTOL = 1e-9
SPECTRAL_RTOL = 1e-6
ZERO_EIG = 1e-9
ADJ_COFACTOR_MAX = 12
PROFILE_CAP = 10**6


@dataclass(frozen=True)
class TreeVolumes:
    """Per-vertex tree volumes on a closure.

    ``omega`` is aligned with ``vertices`` (sorted). ``omega_enum`` is set when
    the enumeration route ran; ``method`` says which routes were used.
    """

    vertices: tuple[int, ...]
    omega: tuple
    omega_V: float
    method: str
    omega_enum: tuple | None = None

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.vertices, self.omega))


def _is_exact(pi) -> bool:
    return isinstance(pi, np.ndarray) and pi.dtype == object


def edge_set_weight(pi, edges) -> float | Fraction:
    """Product of ``pi[i, j]`` over the edges; the empty product is 1."""
    w = Fraction(1) if _is_exact(pi) else 1.0
    for i, j in edges:
        if i == j:
            raise PreconditionError(f"loop ({i}, {i}) in edge set")
        w = w * pi[i, j]
    return w


def _closure_block(pi, closure) -> tuple[list[int], np.ndarray]:
    idx = sorted(int(v) for v in closure)
    if not idx:
        raise PreconditionError("empty closure")
    f = as_float_matrix(pi)
    outside = [j for j in range(len(f)) if j not in set(idx)]
    if outside and np.abs(f[np.ix_(idx, outside)]).sum() > 1e-12:
        raise ContractViolation("closure is not closed under the chain")
    sub = f[np.ix_(idx, idx)]
    if len(recurrent_classes(sub)) != 1:
        raise ContractViolation("restriction has more than one recurrent class")
    return idx, sub


def _omega_determinant(sub: np.ndarray) -> np.ndarray:
    k = len(sub)
    if k == 1:
        return np.ones(1)
    L = np.eye(k) - sub
    out = np.empty(k)
    for i in range(k):
        keep = [j for j in range(k) if j != i]
        out[i] = np.linalg.det(L[np.ix_(keep, keep)])
    # minors of a single-class Laplacian are nonnegative; clip solver noise
    return np.where(np.abs(out) < 1e-15, 0.0, out)


def _omega_enumeration(pi, idx: list[int]) -> list:
    exact = _is_exact(pi)
    a = pi if exact else as_float_matrix(pi)
    support = (lambda c, p: a[c, p] > 0)
    out = []
    for root in idx:
        total = Fraction(0) if exact else 0.0
        for tree in enumerate_rooted_trees(idx, root, support=support, cap=TREE_ENUMERATION_CAP):
            total = total + edge_set_weight(a, tree)
        out.append(total)
    return out


def tree_volumes(pi, closure, method: str = "both") -> TreeVolumes:
    """Tree volumes of every vertex of a closed single-class sub-chain.

    ``method`` is ``"both"`` (enumeration when the closure has at most 10
    vertices, determinants always, cross-checked), ``"enumeration"`` or
    ``"determinant"``. Exact input (object arrays of ``Fraction``) gives exact
    enumeration values.
    """
    if method not in ("both", "enumeration", "determinant"):
        raise PreconditionError(f"unknown method {method!r}")
    idx, sub = _closure_block(pi, closure)
    small = len(idx) <= TREE_ENUMERATION_CAP
    if method == "enumeration":
        if not small:
            raise CapExceededError(f"closure of size {len(idx)} exceeds enumeration cap")
        enum = _omega_enumeration(pi, idx)
        return TreeVolumes(tuple(idx), tuple(enum), sum(enum), "enumeration", tuple(enum))
    det = _omega_determinant(sub)
    if method == "determinant" or not small:
        return TreeVolumes(tuple(idx), tuple(float(x) for x in det), float(det.sum()), "determinant")
    enum = _omega_enumeration(pi, idx)
    ef = np.array([float(x) for x in enum])
    scale = max(1.0, float(np.abs(ef).max()))
    if np.abs(ef - det).max() > AGREE_RTOL * scale:
        raise NumericError(f"tree enumeration {ef} and cofactors {det} disagree")
    return TreeVolumes(tuple(idx), tuple(float(x) for x in det), float(det.sum()), "both", tuple(enum))


def stationary_via_trees(pi, closure, method: str = "both") -> np.ndarray:
    """Length-n vector with ``Omega_i / Omega_V`` on the closure, 0 elsewhere."""
    tv = tree_volumes(pi, closure, method)
    n = len(as_float_matrix(pi))
    out = np.zeros(n)
    out[list(tv.vertices)] = np.array(tv.omega, dtype=float) / tv.omega_V
    return out


def exact_stationary_via_trees(pi, closure) -> dict[int, Fraction]:
    tv = tree_volumes(pi, closure, "enumeration")
    return {v: w / tv.omega_V for v, w in zip(tv.vertices, tv.omega)}


def laplacian_spectrum(pi, closure) -> np.ndarray:
    idx, sub = _closure_block(pi, closure)
    return np.linalg.eigvals(np.eye(len(idx)) - sub)


def omega_spectral(pi, closure) -> float:
    """Product of the nonzero Laplacian eigenvalues on the closure."""
    eig = laplacian_spectrum(pi, closure)
    small = np.abs(eig) < ZERO_EIG
    if small.sum() > 1:
        raise ContractViolation(f"{int(small.sum())} near-zero eigenvalues: several recurrent classes")
    if small.sum() == 0:
        raise NumericError("Laplacian has no zero eigenvalue")
    prod = complex(np.prod(eig[~small])) if (~small).any() else complex(1.0)
    if abs(prod.imag) >= 1e-7 * max(abs(prod), 1e-300):
        raise NumericError(f"eigenvalue product {prod} is not real")
    return prod.real


def adjugate_trace(L: np.ndarray) -> float:
    """Trace of the adjugate, i.e. the sum of principal (k-1)-minors."""
    L = np.asarray(L, dtype=float)
    k = len(L)
    if k == 1:
        return 1.0
    if k <= ADJ_COFACTOR_MAX:
        return float(_omega_determinant(np.eye(k) - L).sum())
    total = 0.0
    for i in range(k):
        keep = [j for j in range(k) if j != i]
        total += np.linalg.det(L[np.ix_(keep, keep)])
    return float(total)


def _support_choices(pi, idx):
    a = as_float_matrix(pi)
    return [[j for j in idx if j != i and a[i, j] > 0] for i in idx]


def _pure_outcomes(pi, closure, cap: int):
    """Yield (weight, local profile) for every pure draw on the closure."""
    idx = sorted(int(v) for v in closure)
    if len(idx) > TREE_ENUMERATION_CAP:
        raise CapExceededError(f"closure of size {len(idx)} exceeds the cap {TREE_ENUMERATION_CAP}")
    choices = _support_choices(pi, idx)
    total = 1
    for c in choices:
        total *= max(len(c), 1)
    if total > cap:
        raise CapExceededError(f"{total} pure draws exceed the cap {cap}")
    pos = {v: k for k, v in enumerate(idx)}
    exact = _is_exact(pi)
    a = pi if exact else as_float_matrix(pi)
    for combo in itertools.product(*choices):
        w = edge_set_weight(a, zip(idx, combo))
        yield w, idx, tuple(pos[t] for t in combo)


def expected_cycle_length(pi, closure, cap: int = PROFILE_CAP):
    """Mean cycle length of a random pure draw, counting only spanning unicycles.

    Each vertex draws one successor independently from its row; a draw scores
    its cycle length if the induced graph has a single cycle, else 0.
    """
    _closure_block(pi, closure)
    acc = None
    for w, _, local in _pure_outcomes(pi, closure, cap):
        dec = decompose(local)
        lam = len(dec.components[0][1]) if dec.count == 1 else 0
        acc = w * lam if acc is None else acc + w * lam
    return acc


def spanning_unicycle_masses(pi, closure, cap: int = PROFILE_CAP):
    """Probability of spanning unicycles through ``i`` and through edge ``(i, j)``.

    Returns ``(u_vertex, u_edge)`` indexed by global vertex ids: ``u_vertex[i]``
    is the chance that a draw is a spanning unicycle with ``i`` on the cycle,
    and ``u_edge[i][j]`` the same with ``(i, j)`` a cycle edge.
    """
    _closure_block(pi, closure)
    u_vertex: dict = {}
    u_edge: dict = {}
    for w, idx, local in _pure_outcomes(pi, closure, cap):
        dec = decompose(local)
        if dec.count != 1:
            continue
        cyc = dec.components[0][1]
        for a in cyc:
            i, j = idx[a], idx[local[a]]
            u_vertex[i] = u_vertex.get(i, 0) + w
            u_edge[(i, j)] = u_edge.get((i, j), 0) + w
    return u_vertex, u_edge
