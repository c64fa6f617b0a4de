"""Dynamic-programming verification oracle for the integer-state model.

Value iteration runs on a truncated state space: once the one-step
distortion of staying silent exceeds the price of transmitting forever,
transmitting is provably optimal, so all states beyond that radius collapse
into one aggregated exterior state with a
forced transmit action.  The greedy policy of the converged values must be a
symmetric threshold rule; its threshold is compared against the renewal-based
solver.  A second, independent route evaluates a fixed threshold policy by
iterating its own pair of fixed-point maps.

Both routes are discounted-only; the average-cost regime is covered by the
vanishing-discount checks in the validation suites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, NumericsError, UsageError
from .model import ModelSpecA


@dataclass(frozen=True)
class TruncatedDP:
    """Converged values and greedy policy on states -bound..bound."""

    bound: int
    lam: float
    beta: float
    states: np.ndarray
    values: np.ndarray
    transmit: np.ndarray
    threshold: int
    iterations: int
    truncation_error_bound: float


def _compactification_radius(spec: ModelSpecA, lam: float) -> int:
    """Smallest e with d(e) >= lam / (1 - beta); transmit is optimal beyond it."""
    target = lam / (1.0 - spec.beta)
    e = 0
    while float(spec.distortion(e)) < target:
        e += 1
        if e > 10_000_000:
            raise CapacityError("distortion grows too slowly to compactify")
    return e


def _silent_continuation(V: np.ndarray, v_exterior: float, spec: ModelSpecA,
                         states: np.ndarray, bound: int) -> np.ndarray:
    """E[V(a e + W)] for every state, exterior mass going to the aggregate."""
    out = np.zeros(len(states))
    scaled = spec.a * states
    for w, pw in spec.pmf.items:
        nxt = scaled + w
        inside = np.abs(nxt) <= bound
        idx = np.clip(nxt + bound, 0, 2 * bound)
        out += pw * np.where(inside, V[idx], v_exterior)
    return out


def default_bound(spec: ModelSpecA, lam: float) -> int:
    r = spec.pmf.radius
    return max(8, 4 * r, _compactification_radius(spec, lam) + r + 1)


def value_iterate(
    spec: ModelSpecA,
    lam: float,
    tol: float = 1e-9,
    bound: int | None = None,
    max_iterations: int = 1_000_000,
) -> TruncatedDP:
    """Solve the costly-communication dynamic program on a truncated state space.

    Stops when successive values differ by at most tol (1 - beta) / (2 beta)
    in sup norm, then extracts the greedy policy with ties resolved to
    staying silent (the largest threshold consistent with optimality).
    """
    beta = spec.beta
    if beta.is_average:
        raise UsageError("value iteration requires beta < 1")
    if lam < 0.0:
        raise UsageError(f"price must be nonnegative, got {lam}")
    B = default_bound(spec, lam) if bound is None else int(bound)
    if B < spec.pmf.radius:
        raise UsageError("bound must cover the innovation support")
    states = np.arange(-B, B + 1)
    dvals = np.asarray(spec.distortion(states), dtype=float)
    V = np.zeros(2 * B + 1)
    stop = tol * (1.0 - beta) / (2.0 * beta)
    i0 = B

    def sweep(V):
        v_tx = (1.0 - beta) * lam + beta * float(
            np.dot(spec.pmf.values, V[i0 + spec.pmf.offsets])
        )
        v_sil = (1.0 - beta) * dvals + beta * _silent_continuation(
            V, v_tx, spec, states, B
        )
        return v_tx, v_sil

    iterations = 0
    for iterations in range(1, max_iterations + 1):
        v_tx, v_sil = sweep(V)
        V_new = np.minimum(v_tx, v_sil)
        delta = float(np.max(np.abs(V_new - V)))
        V = V_new
        if delta <= stop:
            break
    else:
        raise NumericsError(f"value iteration failed to converge in {max_iterations}")

    v_tx, v_sil = sweep(V)
    transmit = v_tx < v_sil  # tie keeps the silent action
    if not transmit[0] or not transmit[-1]:
        raise CapacityError(
            f"greedy policy silent at the truncation edge |e| = {B}; enlarge bound"
        )
    slack = 50.0 * tol
    if float(np.max(np.abs(V - V[::-1]))) > slack:
        raise NumericsError("converged values are not even in the state")
    if np.any(np.diff(V[i0:]) < -slack):
        raise NumericsError("converged values are not monotone on e >= 0")

    pos = transmit[i0:]
    k = int(np.argmax(pos))
    if not (pos[k:].all() and not pos[:k].any()):
        raise NumericsError("greedy policy is not a threshold rule on e >= 0")
    if not np.array_equal(transmit, transmit[::-1]):
        raise NumericsError("greedy policy is not symmetric")

    return TruncatedDP(
        bound=B,
        lam=lam,
        beta=float(beta),
        states=states,
        values=V,
        transmit=transmit,
        threshold=k,
        iterations=iterations,
        truncation_error_bound=spec.pmf.truncation_deficit * lam,
    )


def policy_evaluate_fixed_point(
    spec: ModelSpecA,
    k: int,
    bound: int | None = None,
    tol: float = 1e-10,
    max_iterations: int = 10_000_000,
) -> tuple[float, float]:
    """(D, N) of the threshold-k policy by iterating its fixed-point maps.

    Independent of the renewal route: no pre-transmission functionals and no
    linear solves, only repeated application of the policy's own expectation
    operator.  Every state at or beyond the threshold shares one value, so
    the truncation at ``bound`` is exact once bound >= k - 1.
    """
    beta = spec.beta
    if beta.is_average:
        raise UsageError("fixed-point evaluation requires beta < 1")
    if k < 0:
        raise UsageError(f"threshold must be nonnegative, got {k}")
    if k == 0:
        return 0.0, 1.0
    B = k + spec.pmf.radius if bound is None else int(bound)
    if B < k - 1:
        raise UsageError("bound must cover the silent set")
    states = np.arange(-B, B + 1)
    interior = np.abs(states) < k
    dvals = np.asarray(spec.distortion(states), dtype=float)
    D = np.zeros(2 * B + 1)
    N = np.zeros(2 * B + 1)
    d_ext = 0.0
    n_ext = 0.0
    stop = tol * (1.0 - beta) / (2.0 * beta)
    i0 = B

    for _ in range(max_iterations):
        BD = _silent_continuation(D, d_ext, spec, states, B)
        BN = _silent_continuation(N, n_ext, spec, states, B)
        d_ext_new = beta * float(np.dot(spec.pmf.values, D[i0 + spec.pmf.offsets]))
        n_ext_new = (1.0 - beta) + beta * float(
            np.dot(spec.pmf.values, N[i0 + spec.pmf.offsets])
        )
        D_new = np.where(interior, (1.0 - beta) * dvals + beta * BD, d_ext_new)
        N_new = np.where(interior, beta * BN, n_ext_new)
        delta = max(
            float(np.max(np.abs(D_new - D))),
            float(np.max(np.abs(N_new - N))),
            abs(d_ext_new - d_ext),
            abs(n_ext_new - n_ext),
        )
        D, N, d_ext, n_ext = D_new, N_new, d_ext_new, n_ext_new
        if delta <= stop:
            return float(D[i0]), float(N[i0])
    raise NumericsError(f"fixed-point evaluation failed to converge in {max_iterations}")
