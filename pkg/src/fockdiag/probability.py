"""Beam-splitter outcome statistics for double-Fock superposition inputs.

The input states handled here live on the two input ports (1, 2) of a
balanced beam splitter, with ``N`` and ``M`` particles (0 <= M < N):

    |N:M> = (|N, M> + e^(i*eta) |M, N>) / sqrt(2)   (superposition)
    |N, N>                                           (twin Fock)

``eta`` is the relative phase between the two number components; the
superposition family contains the N00N state as |N:0>. The beam splitter
maps each input operator as a1 -> (i*b1 + b2)/sqrt(2) and
a2 -> (b1 + i*b2)/sqrt(2) (reflection picks up the factor i), and the
measured outcome is the particle pair (s1, s2 = N + M - s1) on the output
ports, with no resolution of internal (spectral/spatial) states.

With partially coherent sources the probability of outcome (s1, s2) is a
polynomial in the averaged scalar-product powers aspp(m, k) of the two
internal states (see :mod:`fockdiag.decoherence`):

    P(s1, s2; eta) = M! N! / (s1! s2! 2^(N+M)) * sum_J C_J(s1) *
        [ aspp(J, 0)
          + (-1)^s1 * aspp(M-J, N-M) * Re((i e^(i*eta))^(N-M)) ]

for the superposition (J = 0..M), while the twin Fock state keeps only the
first, phase-independent term (J = 0..N). The integer exchange coefficients
C_J(s1) count interfering redistribution amplitudes in which exactly J
particle pairs are exchanged coherently between the sources; they are
computed exactly (arbitrary precision) from guarded binomial products.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .decoherence import AsppTable, DecoherenceParams
from .errors import DomainError, ProbabilityError

__all__ = [
    "InputKind",
    "InputState",
    "Outcome",
    "OutcomeDistribution",
    "SignalCurve",
    "CoefficientTable",
    "binomial",
    "channel_prefactor",
    "redistribution_factor",
    "exchange_coefficient",
    "exchange_coefficients",
    "coefficient_table",
    "phase_harmonic",
    "phase_factor",
    "required_aspp_pairs",
    "event_polynomial",
    "event_probability",
    "outcome_distribution",
    "classical_distribution",
    "signal_curve",
    "distribution_from_params",
    "curve_from_params",
    "phase_grid",
]

_CLAMP_FLOOR = -1e-9


class InputKind(enum.Enum):
    DOUBLE_FOCK_SUPERPOSITION = "superposition"
    TWIN_FOCK = "twin_fock"


@dataclass(frozen=True)
class InputState:
    """Two-port number-state input, either |N:M> or |N, N>.

    For the superposition kind ``n`` is the majority and ``m`` the minority
    occupation with 0 <= m < n; for the twin-Fock kind n == m >= 1.
    Use :meth:`superposition`, :meth:`twin_fock`, :meth:`noon`, or
    :meth:`parse` instead of the raw constructor.
    """

    kind: InputKind
    n: int
    m: int

    def __post_init__(self) -> None:
        n, m = int(self.n), int(self.m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        if self.kind is InputKind.DOUBLE_FOCK_SUPERPOSITION:
            if not (0 <= m < n):
                raise DomainError(
                    f"superposition needs 0 <= M < N, got N={n}, M={m}"
                )
        elif self.kind is InputKind.TWIN_FOCK:
            if n != m or n < 1:
                raise DomainError(f"twin Fock needs N == M >= 1, got N={n}, M={m}")
        else:  # pragma: no cover - enum is closed
            raise DomainError(f"unknown input kind {self.kind!r}")

    @classmethod
    def superposition(cls, n: int, m: int) -> "InputState":
        return cls(InputKind.DOUBLE_FOCK_SUPERPOSITION, n, m)

    @classmethod
    def twin_fock(cls, n: int) -> "InputState":
        return cls(InputKind.TWIN_FOCK, n, n)

    @classmethod
    def noon(cls, n: int) -> "InputState":
        """|N:0>, the N-particle path-entangled superposition."""
        return cls.superposition(n, 0)

    @classmethod
    def parse(cls, text: str) -> "InputState":
        """Parse "N:M" (superposition) or "N,N" (twin Fock)."""
        raw = text.strip()
        for sep, factory in ((":", cls.superposition), (",", cls.twin_fock)):
            if sep in raw:
                left, _, right = raw.partition(sep)
                try:
                    a, b = int(left), int(right)
                except ValueError as exc:
                    raise DomainError(f"cannot parse input state {text!r}") from exc
                if sep == ",":
                    if a != b:
                        raise DomainError(
                            f"twin Fock spelled N,N needs equal numbers, got {text!r}"
                        )
                    return factory(a)
                return factory(a, b)
        raise DomainError(f"cannot parse input state {text!r}")

    @property
    def total(self) -> int:
        return self.n + self.m

    @property
    def is_twin_fock(self) -> bool:
        return self.kind is InputKind.TWIN_FOCK

    @property
    def label(self) -> str:
        return f"{self.n},{self.m}" if self.is_twin_fock else f"{self.n}:{self.m}"


@dataclass(frozen=True)
class Outcome:
    """Detected particle numbers (s1, s2) on the two output ports."""

    s1: int
    s2: int

    def __post_init__(self) -> None:
        if self.s1 < 0 or self.s2 < 0:
            raise DomainError(f"outcome counts must be non-negative, got {self}")

    @classmethod
    def of_state(cls, state: InputState, s1: int) -> "Outcome":
        if not 0 <= s1 <= state.total:
            raise DomainError(f"s1 must lie in [0, {state.total}], got {s1}")
        return cls(s1, state.total - s1)


@dataclass(frozen=True)
class OutcomeDistribution:
    """All outcome probabilities of one state at one phase, indexed by s1."""

    state: InputState
    eta: float
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.probs) != self.state.total + 1:
            raise DomainError(
                f"need {self.state.total + 1} probabilities, got {len(self.probs)}"
            )

    def probability(self, s1: int) -> float:
        return self.probs[s1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


@dataclass(frozen=True)
class SignalCurve:
    """Outcome probabilities sampled on a phase grid.

    ``probs`` has shape (len(etas), total + 1); row i is the outcome
    distribution at phase etas[i].
    """

    state: InputState
    etas: np.ndarray
    probs: np.ndarray

    def __post_init__(self) -> None:
        etas = np.asarray(self.etas, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if etas.ndim != 1 or etas.size == 0:
            raise DomainError("etas must be a non-empty 1-d array")
        if probs.shape != (etas.size, self.state.total + 1):
            raise DomainError(
                f"probs shape {probs.shape} does not match "
                f"({etas.size}, {self.state.total + 1})"
            )
        etas.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "etas", etas)
        object.__setattr__(self, "probs", probs)

    def channel(self, s1: int) -> np.ndarray:
        if not 0 <= s1 <= self.state.total:
            raise DomainError(f"s1 must lie in [0, {self.state.total}], got {s1}")
        return self.probs[:, s1]


def binomial(n: int, k: int) -> int:
    """Binomial coefficient extended by 0 outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def redistribution_factor(n: int, p: int, q: int, j: int) -> int:
    """Guarded product of binomials counting one-port redistribution overlaps.

    For n detected particles split as (p, n-p) in the amplitude and
    (q, n-q) in the conjugate amplitude, with j source-exchanged particles
    among them, the overlap count is

        binom(n, p) * binom(p, (j+p-q)/2) * binom(n-p, (j-p+q)/2).

    The value is 0 whenever j+p-q is odd or any lower index leaves its
    range, so all integer inputs are accepted.
    """
    if (j + p - q) % 2 != 0:
        return 0
    half_plus = (j + p - q) // 2
    half_minus = (j - p + q) // 2
    return binomial(n, p) * binomial(p, half_plus) * binomial(n - p, half_minus)


def _checked_channel(state: InputState, s1: int) -> int:
    if not 0 <= s1 <= state.total:
        raise DomainError(f"s1 must lie in [0, {state.total}], got {s1}")
    return state.total - s1


@lru_cache(maxsize=None)
def exchange_coefficients(state: InputState, s1: int) -> tuple[int, ...]:
    """Exact exchange coefficients (C_0, ..., C_M) for one output channel.

    C_J sums, over the redistribution amplitudes r (particles the majority
    source sends to output 1) in the amplitude and r* in the conjugate
    amplitude, the signed product of the two per-port redistribution factors,
    keeping only interference terms in which exactly 2J particles switch
    source association (j of them on port 1):

        C_J = sum_{r, r*} (-1)^(r + r*) sum_j F(s1; r, r*, j)
                                            * F(s2; N-r, N-r*, 2J-j),

    with j running over max(0, 2J-s2) .. min(s1, 2J) at parity j == r - r*
    (mod 2). The r bounds are the physical ones, max(0, s1-M) <= r <= min(N,
    s1): every leg of the four-way particle redistribution must carry a
    non-negative count. Guarded factors vanish outside their domain, so
    widening the bounds cannot change the value; the brute-force oracle
    cross-checks this exhaustively.
    """
    s2 = _checked_channel(state, s1)
    n, m = state.n, state.m
    coeffs: list[int] = []
    r_lo, r_hi = max(0, s1 - m), min(n, s1)
    for exchanges in range(m + 1):
        acc = 0
        j_lo = max(0, 2 * exchanges - s2)
        j_hi = min(s1, 2 * exchanges)
        for r in range(r_lo, r_hi + 1):
            for r_star in range(r_lo, r_hi + 1):
                sign = -1 if (r + r_star) % 2 else 1
                parity = (r - r_star) % 2
                for j in range(j_lo, j_hi + 1):
                    if j % 2 != parity:
                        continue
                    left = redistribution_factor(s1, r, r_star, j)
                    if left == 0:
                        continue
                    right = redistribution_factor(
                        s2, n - r, n - r_star, 2 * exchanges - j
                    )
                    acc += sign * left * right
        coeffs.append(acc)
    return tuple(coeffs)


def exchange_coefficient(state: InputState, s1: int, exchanges: int) -> int:
    """Single exchange coefficient C_J; domain error outside 0 <= J <= M."""
    if not 0 <= exchanges <= state.m:
        raise DomainError(
            f"exchange count must lie in [0, {state.m}], got {exchanges}"
        )
    return exchange_coefficients(state, s1)[exchanges]


@dataclass(frozen=True)
class CoefficientTable:
    """Exchange coefficients of one channel, values[J] = C_J(s1)."""

    state: InputState
    s1: int
    values: tuple[int, ...]


def coefficient_table(state: InputState, s1: int) -> CoefficientTable:
    return CoefficientTable(state, s1, exchange_coefficients(state, s1))


def phase_harmonic(state: InputState) -> int:
    """Harmonic of eta carried by the interference term: N - M (0 for twin)."""
    return state.n - state.m


def phase_factor(state: InputState, eta: float) -> float:
    """Re[(i e^(i*eta))^(N-M)] = cos((N-M) * (eta + pi/2))."""
    harmonic = phase_harmonic(state)
    return math.cos(harmonic * (float(eta) + math.pi / 2.0))


def required_aspp_pairs(state: InputState) -> frozenset[tuple[int, int]]:
    """Overlap-power keys (m, k) the state's probabilities depend on."""
    if state.is_twin_fock:
        return frozenset((j, 0) for j in range(state.n + 1))
    harmonic = phase_harmonic(state)
    pairs = {(j, 0) for j in range(state.m + 1)}
    pairs.update((state.m - j, harmonic) for j in range(state.m + 1))
    return frozenset(pairs)


@lru_cache(maxsize=None)
def _prefactor(n: int, m: int, s1: int, s2: int) -> Fraction:
    return Fraction(
        math.factorial(m) * math.factorial(n),
        math.factorial(s1) * math.factorial(s2) * 2 ** (n + m),
    )


def channel_prefactor(state: InputState, s1: int) -> Fraction:
    """Exact rational prefactor M! N! / (s1! s2! 2^(N+M)) of one channel."""
    s2 = _checked_channel(state, s1)
    return _prefactor(state.n, state.m, s1, s2)


def event_polynomial(state: InputState, s1: int, eta: float, aspps: AsppTable) -> float:
    """Raw value of the channel polynomial, without the probability clamp.

    For jointly physical overlap-power tables this equals the probability;
    for arbitrary table entries individual channels may come out negative
    while structural identities (channel sum 1, mirror symmetry) still hold.
    """
    s2 = _checked_channel(state, s1)
    coeffs = exchange_coefficients(state, s1)
    acc = 0.0
    for j, c in enumerate(coeffs):
        if c:
            acc += c * aspps.value(j, 0)
    if not state.is_twin_fock:
        parity = -1.0 if s1 % 2 else 1.0
        harmonic = phase_harmonic(state)
        cross = 0.0
        for j, c in enumerate(coeffs):
            if c:
                cross += c * aspps.value(state.m - j, harmonic)
        acc += parity * phase_factor(state, eta) * cross
    return float(_prefactor(state.n, state.m, s1, s2)) * acc


def event_probability(state: InputState, s1: int, eta: float, aspps: AsppTable) -> float:
    """Probability of detecting (s1, N+M-s1) on the output ports.

    Evaluates the exchange-coefficient polynomial with the exact rational
    prefactor; tiny negative results from cancellation (>= -1e-9) are clamped
    to 0, anything more negative raises :class:`ProbabilityError`.
    """
    value = event_polynomial(state, s1, eta, aspps)
    if value < 0.0:
        if value < _CLAMP_FLOOR:
            raise ProbabilityError(
                f"probability of channel {s1} is {value!r}, below the "
                f"cancellation floor {_CLAMP_FLOOR}"
            )
        value = 0.0
    return value


def outcome_distribution(state: InputState, eta: float, aspps: AsppTable) -> OutcomeDistribution:
    """All channel probabilities of one state at one phase."""
    probs = tuple(
        event_probability(state, s1, eta, aspps) for s1 in range(state.total + 1)
    )
    return OutcomeDistribution(state, float(eta), probs)


def classical_distribution(total: int, s1: int) -> float:
    """Binomial baseline binom(total, s1) / 2^total for fully decohered input."""
    if total < 0:
        raise DomainError(f"total must be non-negative, got {total}")
    if not 0 <= s1 <= total:
        raise DomainError(f"s1 must lie in [0, {total}], got {s1}")
    return binomial(total, s1) / 2.0**total


def signal_curve(
    state: InputState, etas: Sequence[float] | np.ndarray, aspps: AsppTable
) -> SignalCurve:
    """Outcome distributions across a phase grid, stacked into one curve."""
    eta_arr = np.asarray(etas, dtype=float)
    rows = [outcome_distribution(state, eta, aspps).probs for eta in eta_arr]
    return SignalCurve(state, eta_arr, np.asarray(rows, dtype=float))


def distribution_from_params(
    state: InputState, eta: float, params: DecoherenceParams
) -> OutcomeDistribution:
    """Convenience: build the overlap-power table from params, then evaluate."""
    table = AsppTable.from_params(params, required_aspp_pairs(state))
    return outcome_distribution(state, eta, table)


def curve_from_params(
    state: InputState, etas: Sequence[float] | np.ndarray, params: DecoherenceParams
) -> SignalCurve:
    table = AsppTable.from_params(params, required_aspp_pairs(state))
    return signal_curve(state, etas, table)


def phase_grid(count: int) -> np.ndarray:
    """``count`` equally spaced phases in [0, 2*pi), endpoint excluded."""
    if count < 1:
        raise DomainError(f"phase count must be positive, got {count}")
    return np.linspace(0.0, 2.0 * math.pi, int(count), endpoint=False)
