"""Decoherence diagnosis from interference observables.

The three decoherence strengths scale different overlap powers differently,
so low-order inputs already separate them. Two diagnostic inputs are
implemented in closed form:

Twin Fock |2, 2> (phase-blind, two unknowns). With x = aspp(1, 0) and
y = aspp(2, 0) the channel probabilities are

    P(0,4) = P(4,0) = (1 + 4x + y) / 16,
    p13 := P(1,3) = P(3,1) = (1 - y) / 4,
    p22 := P(2,2) = (3 - 4x + 3y) / 8,

inverted by y = 1 - 4*p13, x = (3 + 3y - 8*p22)/4, then gamma_dist =
sqrt(y/x), gamma_mix = x/sqrt(y). The physical image is the region
0 <= x <= 1, x^2 <= y <= x; its lower edge y = x^2 is pure mixing, the
upper edge y = x pure distinguishability.

Superposition |2:1> (phase-sensitive, all three unknowns). With
a = aspp(1, 0), b = aspp(0, 1), c = aspp(1, 1):

    P(0,3)/(3,0) = (1 + 2a)/8 -/+ ((c + 2b)/8) sin(eta),
    P(1,2)/(2,1) = (3 - 2a)/8 +/- ((3c - 2b)/8) sin(eta),

condensed into the signed visibilities v30 = (c + 2b)/(1 + 2a),
v21 = (3c - 2b)/(3 - 2a) and the phase-averaged extreme-channel weight
p_sum = (1 + 2a)/4. The closed-form inverse is

    a = (4*p_sum - 1)/2,       X = v30 (1 + 2a),   Y = v21 (3 - 2a),
    c = (X + Y)/4,             b = (3X - Y)/8,
    gamma_dist = sqrt(c/b), gamma_mix = sqrt(a*b/c), gamma_phase = sqrt(b*c)/a.

When a, b, or c vanishes the map degenerates: only the product
gamma_dist*gamma_mix = a^(1/2) survives, every triple with gamma_phase or
gamma_dist or gamma_mix equal zero being observationally equivalent
(``DegenerateFullDecoherence``). Inputs no parameter triple can reproduce
within tolerance are flagged ``OutOfPhysicalRegion``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import least_squares

from .decoherence import AsppTable, DecoherenceParams
from .errors import DomainError, RankDeficientError, VisibilityUndefinedError
from .probability import (
    InputState,
    SignalCurve,
    channel_prefactor,
    exchange_coefficients,
    phase_harmonic,
    required_aspp_pairs,
)

__all__ = [
    "Identifiability",
    "Observables21",
    "Observables22",
    "DiagnosisResult",
    "observables_21",
    "observables_22",
    "observables_21_from_params",
    "observables_22_from_params",
    "invert_21",
    "invert_22",
    "signed_visibility",
    "infer_aspps",
    "STATE_21",
    "STATE_22",
]

STATE_21 = InputState.superposition(2, 1)
STATE_22 = InputState.twin_fock(2)

_ZERO_SIGNAL_FLOOR = 1e-15


class Identifiability(enum.Enum):
    UNIQUE = "Unique"
    DEGENERATE_FULL_DECOHERENCE = "DegenerateFullDecoherence"
    OUT_OF_PHYSICAL_REGION = "OutOfPhysicalRegion"


@dataclass(frozen=True)
class Observables21:
    """Signed visibilities and extreme-channel weight of the |2:1> signal."""

    v21: float
    v30: float
    p_sum: float


@dataclass(frozen=True)
class Observables22:
    """Phase-independent channel probabilities of the |2,2> signal."""

    p13: float
    p22: float


@dataclass(frozen=True)
class DiagnosisResult:
    """Inverted parameters with identifiability class and fit residual.

    ``residual`` is the largest absolute difference between the input
    observables and those reproduced by ``params`` (for degenerate results,
    by the degenerate family). ``surviving_products`` carries the parameter
    combinations that remain identified in the degenerate class.
    ``projected`` marks results obtained by projecting out-of-region inputs
    back onto the physical set.
    """

    params: DecoherenceParams
    identifiability: Identifiability
    residual: float
    surviving_products: Mapping[str, float] | None = None
    projected: bool = False


def observables_22(aspps: AsppTable) -> Observables22:
    x = aspps.value(1, 0)
    y = aspps.value(2, 0)
    return Observables22(p13=(1.0 - y) / 4.0, p22=(3.0 - 4.0 * x + 3.0 * y) / 8.0)


def observables_21(aspps: AsppTable) -> Observables21:
    a = aspps.value(1, 0)
    b = aspps.value(0, 1)
    c = aspps.value(1, 1)
    return Observables21(
        v21=(3.0 * c - 2.0 * b) / (3.0 - 2.0 * a),
        v30=(c + 2.0 * b) / (1.0 + 2.0 * a),
        p_sum=(1.0 + 2.0 * a) / 4.0,
    )


def observables_22_from_params(params: DecoherenceParams) -> Observables22:
    return observables_22(AsppTable.from_params(params, required_aspp_pairs(STATE_22)))


def observables_21_from_params(params: DecoherenceParams) -> Observables21:
    return observables_21(AsppTable.from_params(params, required_aspp_pairs(STATE_21)))


def invert_22(
    obs: Observables22, tolerance: float = 1e-9
) -> tuple[float, float, Identifiability]:
    """Recover (gamma_dist, gamma_mix) from twin-Fock observables.

    Returns the parameter pair and its identifiability class. When the
    interference content x vanishes (within ``tolerance``) only
    gamma_dist*gamma_mix = x^(1/2) is identified and the representative
    pair (x^(1/4), x^(1/4)) is returned with the degenerate class. Inputs
    whose reproduced observables differ by more than ``tolerance`` are
    flagged out-of-region (the returned pair is then the best clipped
    candidate). gamma_phase never enters: the twin-Fock signal is immune
    to dephasing.
    """
    y = 1.0 - 4.0 * obs.p13
    x = (3.0 + 3.0 * y - 8.0 * obs.p22) / 4.0
    if x <= tolerance:
        root = max(x, 0.0) ** 0.25
        gamma_dist, gamma_mix = root, root
        ident = Identifiability.DEGENERATE_FULL_DECOHERENCE
    else:
        y_safe = max(y, 0.0)
        gamma_dist = min(math.sqrt(y_safe / x), 1.0)
        if y_safe > 0.0:
            gamma_mix = min(x / math.sqrt(y_safe), 1.0)
        else:
            gamma_mix = 1.0
        ident = Identifiability.UNIQUE
    model = observables_22_from_params(
        DecoherenceParams(gamma_dist, 1.0, gamma_mix)
    )
    residual = max(abs(model.p13 - obs.p13), abs(model.p22 - obs.p22))
    if residual > tolerance:
        ident = Identifiability.OUT_OF_PHYSICAL_REGION
    return gamma_dist, gamma_mix, ident


def _obs21_vector(params: DecoherenceParams) -> np.ndarray:
    model = observables_21_from_params(params)
    return np.array([model.v21, model.v30, model.p_sum])


def invert_21(obs: Observables21, tolerance: float = 1e-9) -> DiagnosisResult:
    """Recover all three decoherence strengths from |2:1> observables.

    Applies the closed-form inverse; when it lands outside [0, 1]^3 the
    result is refined by bounded least squares (projection onto the
    physical set, flagged via ``projected``). Degenerate inputs (any of the
    overlap quantities a, b, c consistent with zero at ``tolerance``)
    return the representative triple (a^(1/4), 0, a^(1/4)) and the
    surviving product gamma_dist*gamma_mix = a^(1/2); such data cannot
    distinguish which mechanism died. Residuals above ``tolerance`` after
    projection are classed out-of-region.
    """
    target = np.array([obs.v21, obs.v30, obs.p_sum])
    a = (4.0 * obs.p_sum - 1.0) / 2.0
    x_mix = obs.v30 * (1.0 + 2.0 * a)
    y_mix = obs.v21 * (3.0 - 2.0 * a)
    c = (x_mix + y_mix) / 4.0
    b = (3.0 * x_mix - y_mix) / 8.0

    if a <= tolerance or b <= tolerance or c <= tolerance:
        a_clip = min(max(a, 0.0), 1.0)
        root = a_clip**0.25
        params = DecoherenceParams(root, 0.0, root)
        # Inside the degenerate family v21 = v30 = 0 exactly and p_sum is
        # matched by any a in [0, 1]; the residual is the distance to the
        # whole family, not to the single representative.
        residual = max(
            abs(obs.v21),
            abs(obs.v30),
            max(0.25 - obs.p_sum, obs.p_sum - 0.75, 0.0),
        )
        ident = (
            Identifiability.DEGENERATE_FULL_DECOHERENCE
            if residual <= tolerance
            else Identifiability.OUT_OF_PHYSICAL_REGION
        )
        return DiagnosisResult(
            params=params,
            identifiability=ident,
            residual=residual,
            surviving_products={"gamma_dist*gamma_mix": math.sqrt(a_clip)},
        )

    gamma_dist = math.sqrt(c / b)
    gamma_mix = math.sqrt(a * b / c)
    gamma_phase = math.sqrt(b * c) / a
    raw = np.array([gamma_dist, gamma_phase, gamma_mix])
    slack = 1e-9
    projected = False
    if np.any(raw > 1.0 + slack) or np.any(raw < -slack):
        start = np.clip(raw, 0.0, 1.0)
        fit = least_squares(
            lambda p: _obs21_vector(DecoherenceParams(*p)) - target,
            start,
            bounds=(np.zeros(3), np.ones(3)),
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
        )
        raw = fit.x
        projected = True
    clipped = np.clip(raw, 0.0, 1.0)
    params = DecoherenceParams(*clipped)
    residual = float(np.max(np.abs(_obs21_vector(params) - target)))
    ident = (
        Identifiability.UNIQUE
        if residual <= tolerance
        else Identifiability.OUT_OF_PHYSICAL_REGION
    )
    return DiagnosisResult(
        params=params,
        identifiability=ident,
        residual=residual,
        projected=projected,
    )


def _fit_channel(curve: SignalCurve, s1: int) -> tuple[float, float]:
    """Least-squares fit of one channel to mean + w * Re[(i e^(i eta))^K].

    Returns (mean, t) with t = (-1)^s1 * w, the parity-adjusted coefficient
    of the model's phase harmonic. For the twin-Fock state (K = 0) the
    channel is constant in the model and t = 0.
    """
    harmonic = phase_harmonic(curve.state)
    values = curve.channel(s1)
    if harmonic == 0:
        return float(np.mean(values)), 0.0
    if np.unique(curve.etas).size < 2 * harmonic + 3:
        raise DomainError(
            f"need at least {2 * harmonic + 3} distinct phases to fit "
            f"harmonic {harmonic}, got {np.unique(curve.etas).size}"
        )
    design = np.column_stack(
        [
            np.ones_like(curve.etas),
            np.cos(harmonic * curve.etas),
            np.sin(harmonic * curve.etas),
        ]
    )
    coeffs, *_ = np.linalg.lstsq(design, values, rcond=None)
    mean, cos_part, sin_part = coeffs
    # Re[(i e^(i eta))^K] = cos(K pi / 2) cos(K eta) - sin(K pi / 2) sin(K eta)
    half_turns = harmonic % 4
    cos_phase = (1.0, 0.0, -1.0, 0.0)[half_turns]
    sin_phase = (0.0, 1.0, 0.0, -1.0)[half_turns]
    w = cos_part * cos_phase - sin_part * sin_phase
    parity = -1.0 if s1 % 2 else 1.0
    return float(mean), float(parity * w)


def signed_visibility(curve: SignalCurve, s1: int) -> float:
    """Interference visibility of one channel with a relative sign.

    Magnitude is |fitted harmonic amplitude| / fitted mean. The sign is
    positive when the channel oscillates in phase with the s1 = 0 channel
    (after dividing out the (-1)^s1 parity both carry) and negative when in
    antiphase. A channel that is identically zero has no visibility and
    raises :class:`VisibilityUndefinedError`.
    """
    mean, t_val = _fit_channel(curve, s1)
    if abs(mean) <= _ZERO_SIGNAL_FLOOR and abs(t_val) <= _ZERO_SIGNAL_FLOOR:
        raise VisibilityUndefinedError(
            f"channel {s1} carries no signal; visibility undefined"
        )
    if mean <= _ZERO_SIGNAL_FLOOR:
        raise VisibilityUndefinedError(
            f"channel {s1} has vanishing mean but nonzero amplitude"
        )
    if phase_harmonic(curve.state) == 0:
        return 0.0
    _, t_anchor = _fit_channel(curve, 0)
    sign = -1.0 if t_val * t_anchor < 0.0 else 1.0
    return sign * abs(t_val) / mean


def infer_aspps(state: InputState, curve: SignalCurve) -> tuple[AsppTable, float]:
    """Invert a full signal curve for every overlap power the state probes.

    Fits each channel's mean and phase-harmonic amplitude, then solves the
    stacked linear system in the unknown overlap powers: channel means
    constrain the phase-blind entries (J, 0), J = 1..M (the (0, 0) = 1 term
    is moved to the right-hand side), and harmonic amplitudes constrain the
    phase-bearing entries (M-J, N-M), J = 0..M. Twin-Fock input has means
    only, with unknowns (J, 0), J = 1..N. Returns the recovered table and
    the condition number of the stacked design matrix; a numerically
    rank-deficient system raises :class:`RankDeficientError`.
    """
    if curve.state != state:
        raise DomainError(
            f"curve belongs to state {curve.state.label}, expected {state.label}"
        )
    fits = [_fit_channel(curve, s1) for s1 in range(state.total + 1)]
    if state.is_twin_fock:
        unknowns = [(j, 0) for j in range(1, state.n + 1)]
    else:
        harmonic = phase_harmonic(state)
        unknowns = [(j, 0) for j in range(1, state.m + 1)]
        unknowns += [(state.m - j, harmonic) for j in range(state.m + 1)]
    index = {pair: col for col, pair in enumerate(unknowns)}
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    for s1, (mean, t_val) in enumerate(fits):
        pref = float(channel_prefactor(state, s1))
        coeffs = exchange_coefficients(state, s1)
        mean_row = np.zeros(len(unknowns))
        offset = pref * coeffs[0]
        for j, c in enumerate(coeffs):
            if j == 0 or c == 0:
                continue
            mean_row[index[(j, 0)]] = pref * c
        rows.append(mean_row)
        rhs.append(mean - offset)
        if not state.is_twin_fock:
            cross_row = np.zeros(len(unknowns))
            for j, c in enumerate(coeffs):
                if c:
                    cross_row[index[(state.m - j, harmonic)]] = pref * c
            rows.append(cross_row)
            rhs.append(t_val)
    matrix = np.vstack(rows)
    vector = np.asarray(rhs)
    rank = int(np.linalg.matrix_rank(matrix))
    if rank < len(unknowns):
        raise RankDeficientError(rank, len(unknowns))
    solution, *_ = np.linalg.lstsq(matrix, vector, rcond=None)
    condition = float(np.linalg.cond(matrix))
    entries = {pair: float(val) for pair, val in zip(unknowns, solution)}
    entries[(0, 0)] = 1.0
    return AsppTable(entries), condition
