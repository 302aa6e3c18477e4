"""Phase estimation, order finding, and the classical factoring wrapper.

Order finding runs phase estimation on the in-place modular multiplier
with the second register prepared in |1>, an even mixture of the
multiplier's eigenvectors, so each round samples an m-bit estimate j of
some t/r.  Continued fractions of j/2^m then propose candidate orders,
each verified classically by modular exponentiation before acceptance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import partition
from .circuit import Circuit, execute
from .netsim import ResourceLedger
from .qft import FourierSpec, build_inverse_qft
from .qstate import QuantumState, RandomSource
from .revarith import RegisterLayout, build_cm_m

MONOLITHIC = "monolithic"
DISTRIBUTED = "distributed"


@dataclass(frozen=True)
class PhaseEstimate:
    j: int
    m: int

    @property
    def theta(self) -> Fraction:
        return Fraction(self.j, 1 << self.m)


@dataclass
class OrderRound:
    j: int
    candidates: list[int]
    r_found: int | None


@dataclass
class OrderResult:
    a: int
    N: int
    r: int | None
    rounds_used: int
    transcript: list[OrderRound] = field(default_factory=list)
    ledger: ResourceLedger | None = None  # distributed-mode totals


@dataclass
class FactoringOutcome:
    N: int
    factors: tuple[int, int] | None
    failure: str | None
    attempts: list[int]
    seed: int
    order_results: list[OrderResult] = field(default_factory=list)


# -- generic phase estimation ----------------------------------------------

def phase_estimate(controlled_power: Callable[[int, int], Circuit],
                   prepare: Circuit, m: int, n_target: int,
                   rng: RandomSource) -> PhaseEstimate:
    """Estimate the eigenphase of a unitary given its controlled powers.

    ``controlled_power(i, control_qubit)`` must return a circuit applying
    the unitary ``2^i`` times under the given control; target qubits are
    ``0..n_target-1`` and the estimation register sits above them.
    ``prepare`` initializes the eigenstate.  Returns the measured j; when
    the phase is an exact m-bit fraction j/2^m the result is j with
    certainty, otherwise the best estimate appears with probability at
    least 4/pi^2.
    """
    state = prepare_phase_state(controlled_power, prepare, m, n_target, rng)
    k_qubits = list(range(n_target, n_target + m))
    j = 0
    for i, q in enumerate(k_qubits):
        j |= state.measure(q, rng) << i
    return PhaseEstimate(j=j, m=m)


def prepare_phase_state(controlled_power: Callable[[int, int], Circuit],
                        prepare: Circuit, m: int, n_target: int,
                        rng: RandomSource) -> QuantumState:
    """Run the estimation circuit up to (not including) measurement."""
    if m < 1:
        raise ValueError("need at least one estimation qubit")
    k_qubits = list(range(n_target, n_target + m))
    pool = n_target + m
    circ = Circuit(pool, label="phase-estimation")
    circ.extend(prepare)
    for q in k_qubits:
        circ.h(q, label="prep/H")
    for i, kq in enumerate(k_qubits):
        circ.extend(controlled_power(i, kq), label_prefix=f"cpow[{i}]")
    circ.extend(build_inverse_qft(FourierSpec(m), k_qubits,
                                  num_qubits=pool))
    state = QuantumState(pool)
    execute(circ, state, rng)
    return state


# -- order finding -----------------------------------------------------------

def order_circuit_parts(a: int, N: int,
                        m: int) -> tuple[Circuit, Circuit, RegisterLayout]:
    """Single-machine order-finding program, split at the point where the
    sparse-support bound applies: (preparation + power ladder, inverse
    transform)."""
    n = N.bit_length()
    layout = RegisterLayout.packed(n, m)
    modexp = Circuit(layout.num_data_qubits, label="order/modexp")
    modexp.x(layout.x[0], label="prep/one")
    for i, kq in enumerate(layout.k):
        modexp.h(kq, label=f"prep/H[{i}]")
    modexp.extend(build_cm_m(a, N, m, layout))
    transform = build_inverse_qft(FourierSpec(m), layout.k,
                                  num_qubits=layout.num_data_qubits)
    return modexp, transform, layout


def order_circuit(a: int, N: int, m: int) -> tuple[Circuit, RegisterLayout]:
    """Single-machine order-finding program (measurement left out)."""
    modexp, transform, layout = order_circuit_parts(a, N, m)
    modexp.extend(transform)
    return modexp, layout


@dataclass
class OrderRun:
    """One pre-measurement order-finding execution, either mode."""

    a: int
    N: int
    m: int
    mode: str
    k_qubits: tuple[int, ...]
    state: QuantumState
    distributed: "partition.DistributedRun | None" = None
    max_support: int | None = None

    def first_register_distribution(self) -> dict[int, float]:
        return self.state.exact_distribution(self.k_qubits)

    def measure_first_register(self, rng: RandomSource) -> int:
        j = 0
        for i, q in enumerate(self.k_qubits):
            j |= self.state.measure(q, rng) << i
        return j


def run_order_circuit(a: int, N: int, m: int | None, rng: RandomSource,
                      mode: str = MONOLITHIC) -> OrderRun:
    """Execute the order-finding circuit up to measurement.

    The sparse support never exceeds 4 * 2^m: the estimation register
    contributes 2^m branches and the shared-control protocol at most a
    transient doubling on each side of a measurement.
    """
    if m is None:
        m = 2 * N.bit_length()
    support_limit = 4 << m
    if mode == MONOLITHIC:
        modexp, transform, layout = order_circuit_parts(a, N, m)
        state = QuantumState(layout.num_data_qubits)
        execute(modexp, state, rng)
        modexp_peak = state.peak_support
        execute(transform, state, rng)
        run = OrderRun(a=a, N=N, m=m, mode=mode, k_qubits=layout.k,
                       state=state, max_support=modexp_peak)
    elif mode == DISTRIBUTED:
        dist = partition.run_order_program(a, N, m, rng)
        run = OrderRun(a=a, N=N, m=m, mode=mode,
                       k_qubits=dist.plan.layout.k,
                       state=dist.network.state, distributed=dist,
                       max_support=dist.modexp_peak)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if run.max_support is not None and run.max_support > support_limit:
        raise RuntimeError("sparse support exceeded its bound")
    return run


def continued_fraction(j: int, two_to_m: int, N: int) -> list[int]:
    """Denominators (< N, ascending, deduplicated) of the convergents of
    j / 2^m.  j = 0 carries no information and yields an empty list."""
    if not 0 <= j < two_to_m:
        raise ValueError("estimate out of range")
    if j == 0:
        return []
    denominators = []
    p, q = j, two_to_m
    k_prev, k = 1, 0  # convergent denominators, one step behind
    while q:
        a = p // q
        p, q = q, p - q * a
        k_prev, k = k, a * k + k_prev
        if k >= N:
            break
        if k not in denominators:
            denominators.append(k)
    return sorted(denominators)


def order_candidates(j: int, m: int, N: int) -> list[int]:
    """Candidate orders for one estimate: convergent denominators and
    their small multiples (recovers r when the sampled t shares a factor
    with it), ascending."""
    n = N.bit_length()
    base = continued_fraction(j, 1 << m, N)
    cands = {c * d for d in base for c in range(1, n + 1)
             if 1 <= c * d < N}
    return sorted(cands)


def _minimal_order(a: int, N: int, exponent: int) -> int:
    """Shrink a verified exponent to the least one: divide out primes
    while the power stays 1."""
    e = exponent
    f = 2
    remaining = exponent
    while f * f <= remaining:
        while remaining % f == 0:
            remaining //= f
            if pow(a, e // f, N) == 1:
                e //= f
        f += 1
    if remaining > 1 and pow(a, e // remaining, N) == 1:
        e //= remaining
    return e


def find_order(a: int, N: int, m: int | None = None,
               rng: RandomSource | None = None, *, mode: str = MONOLITHIC,
               max_rounds: int | None = None) -> OrderResult:
    """Quantum order finding with classical verification.

    Each round measures an estimate j, derives candidate orders from the
    continued-fraction convergents of j/2^m, and accepts the smallest
    candidate e with a^e = 1 mod N (minimized over divisors, so the
    returned r is the true order).  Unproductive rounds retry up to
    ``max_rounds``.
    """
    if not 1 < a < N:
        raise ValueError("base must lie strictly between 1 and N")
    if math.gcd(a, N) != 1:
        raise ValueError(f"{a} shares a factor with {N}")
    n = N.bit_length()
    if m is None:
        m = 2 * n
    if rng is None:
        rng = RandomSource(0)
    if max_rounds is None:
        max_rounds = default_max_rounds(N)

    result = OrderResult(a=a, N=N, r=None, rounds_used=0)
    if mode == DISTRIBUTED:
        result.ledger = ResourceLedger()
    for _ in range(max_rounds):
        run = run_order_circuit(a, N, m, rng, mode)
        j = run.measure_first_register(rng)
        if run.distributed is not None:
            result.ledger.merge(run.distributed.network.ledger)
        result.rounds_used += 1
        cands = order_candidates(j, m, N)
        found = None
        for e in cands:
            if pow(a, e, N) == 1:
                found = _minimal_order(a, N, e)
                break
        result.transcript.append(OrderRound(j=j, candidates=cands,
                                            r_found=found))
        if found is not None:
            result.r = found
            return result
    return result


def default_max_rounds(N: int) -> int:
    loglog = math.ceil(math.log2(max(2.0, math.log2(N))))
    return 8 * loglog + 8


# -- classical wrapper --------------------------------------------------------

def is_prime(N: int) -> bool:
    if N < 2:
        return False
    f = 2
    while f * f <= N:
        if N % f == 0:
            return False
        f += 1
    return True


def prime_power_root(N: int) -> int | None:
    """The prime p with N = p^k (k >= 2), if one exists."""
    for k in range(2, N.bit_length() + 1):
        root = round(N ** (1.0 / k))
        for p in (root - 1, root, root + 1):
            if p >= 2 and p**k == N:
                return p
    return None


def classical_rejection(N: int) -> str | None:
    """Inputs the quantum routine refuses: even, prime, or prime powers."""
    if N < 3:
        return "N must be at least 3"
    if N % 2 == 0:
        return "N must be odd"
    if is_prime(N):
        return "N is prime"
    if prime_power_root(N) is not None:
        return "N is a prime power"
    return None


def factor(N: int, rng: RandomSource, *, a: int | None = None,
           m: int | None = None, mode: str = MONOLITHIC,
           max_rounds: int | None = None,
           max_attempts: int = 16) -> FactoringOutcome:
    """Factor an odd composite N that is not a prime power.

    Pick a base (or use the fixed one), shortcut on a shared factor, find
    its order r, and when r is even with a^(r/2) != -1 mod N read the
    factors off gcd(a^(r/2) +- 1, N).  Otherwise retry with a new base.
    """
    reason = classical_rejection(N)
    if reason is not None:
        return FactoringOutcome(N=N, factors=None, failure=reason,
                                attempts=[], seed=rng.seed)
    outcome = FactoringOutcome(N=N, factors=None, failure=None,
                               attempts=[], seed=rng.seed)
    for _ in range(max_attempts):
        base = a if a is not None else rng.randint(2, N - 1)
        outcome.attempts.append(base)
        g = math.gcd(base, N)
        if g > 1:
            outcome.factors = (g, N // g)
            return outcome
        order = find_order(base, N, m, rng, mode=mode,
                           max_rounds=max_rounds)
        outcome.order_results.append(order)
        r = order.r
        if r is not None and r % 2 == 0:
            half = pow(base, r // 2, N)
            if half != N - 1:
                p = math.gcd(half - 1, N)
                q = math.gcd(half + 1, N)
                if 1 < p < N:
                    outcome.factors = (p, N // p)
                    return outcome
                if 1 < q < N:
                    outcome.factors = (q, N // q)
                    return outcome
        if a is not None:
            break  # a fixed base that fails cannot be retried
    outcome.failure = "retry budget exhausted"
    return outcome
