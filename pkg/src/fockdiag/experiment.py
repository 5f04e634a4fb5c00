"""Synthetic measurement runs and statistical estimation.

Closes the loop from decoherence parameters to diagnosed parameters with
uncertainties: sample multinomial counts from a signal curve with a
counter-based generator (reproducible per (seed, phase index)), estimate
the diagnostic observables by per-channel harmonic regression with the full
multinomial covariance, and push both point estimates and covariance through
the closed-form inversion by the delta method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decoherence import DecoherenceParams
from .diagnosis import (
    DiagnosisResult,
    Identifiability,
    Observables21,
    Observables22,
    STATE_21,
    STATE_22,
    invert_21,
    invert_22,
    observables_21_from_params,
    observables_22_from_params,
)
from .errors import CountDataError, DomainError
from .probability import InputState, SignalCurve, phase_harmonic

__all__ = [
    "CountRecord",
    "EstimatedObservables",
    "RunDiagnosis",
    "sample_counts",
    "estimate_observables",
    "diagnose_run",
]

_JACOBIAN_STEP = 1e-6
_MAX_SEED = 2**64


@dataclass(frozen=True)
class CountRecord:
    """Counts observed at one phase setting: counts[s1] events in channel s1."""

    eta: float
    shots: int
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise CountDataError(f"shots must be >= 1, got {self.shots}")
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise CountDataError(f"counts must be non-negative, got {counts}")
        if sum(counts) != self.shots:
            raise CountDataError(
                f"counts sum to {sum(counts)}, expected shots={self.shots}"
            )
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "shots", int(self.shots))

    def frequencies(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.shots


@dataclass(frozen=True)
class EstimatedObservables:
    """Point estimates with standard errors and covariance.

    ``values`` is an :class:`Observables21` or :class:`Observables22`;
    ``field_order`` names the axes of ``covariance`` (matching the dataclass
    fields), ``std_errors`` holds the diagonal square roots.
    ``v21_sign_confidence`` (|2:1> only) is the Gaussian probability that
    the sign reported for the (1,2)/(2,1) interference amplitude is correct;
    near 1/2 the data do not resolve the sign.
    """

    values: Observables21 | Observables22
    std_errors: dict[str, float]
    shots_total: int
    covariance: np.ndarray
    field_order: tuple[str, ...]
    v21_sign_confidence: float | None = None


@dataclass(frozen=True)
class RunDiagnosis:
    """Parameter diagnosis of one measurement run, with uncertainties.

    ``std_errors`` maps parameter names to delta-method standard errors
    (empty for degenerate or out-of-region results, where the closed-form
    Jacobian is meaningless). ``unidentified`` lists parameters the state
    cannot see at all (twin-Fock data never constrain gamma_phase; its
    entry in ``params`` is pinned to the immune value 1).
    """

    state: InputState
    observables: EstimatedObservables
    diagnosis: DiagnosisResult
    std_errors: dict[str, float]
    region_tolerance: float
    unidentified: tuple[str, ...] = ()


def sample_counts(
    curve: SignalCurve, shots_per_phase: int, seed: int
) -> list[CountRecord]:
    """Draw multinomial counts at every phase of a signal curve.

    Each phase index uses its own counter-based Philox stream keyed by
    (seed, index), so records are reproducible bit for bit and independent
    of sampling order. Rows must be valid distributions (entries in [0, 1],
    sum 1 within 1e-9).
    """
    if shots_per_phase < 1:
        raise CountDataError(f"shots_per_phase must be >= 1, got {shots_per_phase}")
    seed = int(seed)
    if not 0 <= seed < _MAX_SEED:
        raise CountDataError(f"seed must lie in [0, 2^64), got {seed}")
    records: list[CountRecord] = []
    for index, eta in enumerate(curve.etas):
        row = np.asarray(curve.probs[index], dtype=float)
        if np.any(row < 0.0) or np.any(row > 1.0 + 1e-12):
            raise CountDataError(f"row {index} is not a probability vector: {row}")
        total = float(row.sum())
        if abs(total - 1.0) > 1e-9:
            raise CountDataError(f"row {index} sums to {total!r}, expected 1")
        rng = np.random.Generator(
            np.random.Philox(key=np.array([seed, index], dtype=np.uint64))
        )
        counts = rng.multinomial(shots_per_phase, row / total)
        records.append(CountRecord(float(eta), shots_per_phase, tuple(counts)))
    return records


def _validate_records(
    records: Sequence[CountRecord], state: InputState
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not records:
        raise CountDataError("no measurement records given")
    channels = state.total + 1
    for rec in records:
        if len(rec.counts) != channels:
            raise CountDataError(
                f"record at eta={rec.eta} has {len(rec.counts)} channels, "
                f"expected {channels}"
            )
    etas = np.array([rec.eta for rec in records])
    shots = np.array([rec.shots for rec in records], dtype=float)
    freqs = np.vstack([rec.frequencies() for rec in records])
    needed = 2 * phase_harmonic(state) + 3
    if np.unique(etas).size < needed:
        raise CountDataError(
            f"insufficient phase coverage: need {needed} distinct phases, "
            f"got {np.unique(etas).size}"
        )
    return etas, shots, freqs


def _multinomial_covariance(probs_row: np.ndarray, shots: float) -> np.ndarray:
    """cov(f_s, f_s') = (delta p_s - p_s p_s') / shots for one record."""
    return (np.diag(probs_row) - np.outer(probs_row, probs_row)) / shots


def _linear_statistic_covariance(
    coeff_maps: Sequence[np.ndarray],
    model_probs: np.ndarray,
    shots: np.ndarray,
) -> np.ndarray:
    """Covariance of statistics S_a = sum_{r,s} coeff_a[r, s] f[r, s].

    Records are independent; within one record the channel frequencies are
    multinomial with the given model probabilities.
    """
    n_stats = len(coeff_maps)
    cov = np.zeros((n_stats, n_stats))
    for r in range(model_probs.shape[0]):
        sigma = _multinomial_covariance(model_probs[r], shots[r])
        for a in range(n_stats):
            row_a = coeff_maps[a][r]
            for b in range(a, n_stats):
                value = float(row_a @ sigma @ coeff_maps[b][r])
                cov[a, b] += value
                if b != a:
                    cov[b, a] += value
    return cov


def _estimate_21(records: Sequence[CountRecord]) -> EstimatedObservables:
    etas, shots, freqs = _validate_records(records, STATE_21)
    n_rec = etas.size
    design = np.column_stack([np.ones(n_rec), np.cos(etas), np.sin(etas)])
    weights = shots / shots.sum()
    normal = design.T @ (design * weights[:, None])
    hat = np.linalg.solve(normal, (design * weights[:, None]).T)  # (3, n_rec)
    h_mean = hat[0]
    # Model harmonic for N - M = 1 is Re[i e^(i eta)] = -sin(eta).
    h_amp = -hat[2]

    beta = hat @ freqs  # (3, channels) regression per channel
    fitted = design @ beta  # smoothed probabilities per record
    fitted = np.clip(fitted, 1e-12, None)
    fitted /= fitted.sum(axis=1, keepdims=True)

    # Pooled statistics: T = parity-adjusted harmonic sums, M = mean sums.
    mean_ch = h_mean @ freqs
    amp_ch = h_amp @ freqs
    t_ch = amp_ch * np.array([1.0, -1.0, 1.0, -1.0])
    t30 = t_ch[0] + t_ch[3]
    m30 = mean_ch[0] + mean_ch[3]
    t21 = t_ch[1] + t_ch[2]
    m21 = mean_ch[1] + mean_ch[2]
    if m30 <= 0.0 or m21 <= 0.0:
        raise CountDataError("channel means vanished; cannot form visibilities")
    values = Observables21(
        v21=float(t21 / m21), v30=float(t30 / m30), p_sum=float(m30)
    )

    channels = 4
    c_t30 = np.zeros((n_rec, channels))
    c_t30[:, 0] = h_amp
    c_t30[:, 3] = -h_amp
    c_m30 = np.zeros((n_rec, channels))
    c_m30[:, 0] = h_mean
    c_m30[:, 3] = h_mean
    c_t21 = np.zeros((n_rec, channels))
    c_t21[:, 1] = -h_amp
    c_t21[:, 2] = h_amp
    c_m21 = np.zeros((n_rec, channels))
    c_m21[:, 1] = h_mean
    c_m21[:, 2] = h_mean
    stat_cov = _linear_statistic_covariance(
        [c_t30, c_m30, c_t21, c_m21], fitted, shots
    )
    # Delta method: (v21, v30, p_sum) from (T30, M30, T21, M21).
    jac = np.zeros((3, 4))
    jac[0, 2] = 1.0 / m21
    jac[0, 3] = -t21 / m21**2
    jac[1, 0] = 1.0 / m30
    jac[1, 1] = -t30 / m30**2
    jac[2, 1] = 1.0
    obs_cov = jac @ stat_cov @ jac.T
    std = np.sqrt(np.clip(np.diag(obs_cov), 0.0, None))
    sigma_t21 = math.sqrt(max(stat_cov[2, 2], 0.0))
    if sigma_t21 > 0.0:
        confidence = 0.5 * (1.0 + math.erf(abs(t21) / sigma_t21 / math.sqrt(2.0)))
    else:
        confidence = 1.0
    return EstimatedObservables(
        values=values,
        std_errors={"v21": float(std[0]), "v30": float(std[1]), "p_sum": float(std[2])},
        shots_total=int(shots.sum()),
        covariance=obs_cov,
        field_order=("v21", "v30", "p_sum"),
        v21_sign_confidence=float(confidence),
    )


def _estimate_22(records: Sequence[CountRecord]) -> EstimatedObservables:
    _, shots, freqs = _validate_records(records, STATE_22)
    n_rec = shots.size
    weights = shots / shots.sum()
    mean_ch = weights @ freqs  # pooled channel frequencies
    values = Observables22(
        p13=float(0.5 * (mean_ch[1] + mean_ch[3])), p22=float(mean_ch[2])
    )
    channels = 5
    c_p13 = np.zeros((n_rec, channels))
    c_p13[:, 1] = 0.5 * weights
    c_p13[:, 3] = 0.5 * weights
    c_p22 = np.zeros((n_rec, channels))
    c_p22[:, 2] = weights
    model = np.tile(mean_ch, (n_rec, 1))
    obs_cov = _linear_statistic_covariance([c_p13, c_p22], model, shots)
    std = np.sqrt(np.clip(np.diag(obs_cov), 0.0, None))
    return EstimatedObservables(
        values=values,
        std_errors={"p13": float(std[0]), "p22": float(std[1])},
        shots_total=int(shots.sum()),
        covariance=obs_cov,
        field_order=("p13", "p22"),
    )


def estimate_observables(
    records: Sequence[CountRecord], state: InputState
) -> EstimatedObservables:
    """Estimate the diagnostic observables of |2:1> or |2,2> from counts.

    |2:1>: each channel is regressed (shot-weighted) on
    [1, cos eta, sin eta]; mirror channels are pooled into the signed
    visibilities and the extreme-channel weight exactly as the closed forms
    define them. |2,2>: pooled channel frequencies. Covariances combine the
    exact per-record multinomial covariance (evaluated at smoothed fitted
    probabilities) across independent records.
    """
    if state == STATE_21:
        return _estimate_21(records)
    if state == STATE_22:
        return _estimate_22(records)
    raise DomainError(
        f"estimators are defined for states 2:1 and 2,2, got {state.label}"
    )


def _closed_inverse_21(obs: np.ndarray) -> np.ndarray:
    """Unclipped closed-form inverse (gamma_dist, gamma_phase, gamma_mix).

    Intermediate quantities are floored at a tiny positive value so the map
    stays differentiable for finite-difference error propagation near the
    physical region.
    """
    floor = 1e-15
    v21, v30, p_sum = obs
    a = max((4.0 * p_sum - 1.0) / 2.0, floor)
    x_mix = v30 * (1.0 + 2.0 * a)
    y_mix = v21 * (3.0 - 2.0 * a)
    c = max((x_mix + y_mix) / 4.0, floor)
    b = max((3.0 * x_mix - y_mix) / 8.0, floor)
    return np.array(
        [math.sqrt(c / b), math.sqrt(b * c) / a, math.sqrt(a * b / c)]
    )


def _closed_inverse_22(obs: np.ndarray) -> np.ndarray:
    floor = 1e-15
    p13, p22 = obs
    y = max(1.0 - 4.0 * p13, floor)
    x = max((3.0 + 3.0 * y - 8.0 * p22) / 4.0, floor)
    return np.array([math.sqrt(y / x), x / math.sqrt(y)])


def _numerical_jacobian(func, point: np.ndarray) -> np.ndarray:
    base = func(point)
    jac = np.zeros((base.size, point.size))
    for j in range(point.size):
        shift = np.zeros(point.size)
        shift[j] = _JACOBIAN_STEP
        jac[:, j] = (func(point + shift) - func(point - shift)) / (2 * _JACOBIAN_STEP)
    return jac


def diagnose_run(
    records: Sequence[CountRecord],
    state: InputState,
    region_tolerance: float = 3.0,
) -> RunDiagnosis:
    """Full chain: counts -> observables -> parameters with uncertainties.

    The inversion tolerance is ``region_tolerance`` estimated standard
    errors (floored at 1e-9), so estimates that fall outside the physical
    region by no more than that are projected back and flagged rather than
    rejected. Parameter standard errors propagate the observable covariance
    through the closed-form inverse by central finite differences
    (step 1e-6); they are only reported for unique results.
    """
    if region_tolerance <= 0.0:
        raise DomainError(f"region_tolerance must be positive, got {region_tolerance}")
    est = estimate_observables(records, state)
    sigma_max = max(est.std_errors.values())
    tolerance = max(1e-9, region_tolerance * sigma_max)
    if state == STATE_21:
        result = invert_21(est.values, tolerance=tolerance)
        obs_point = np.array(
            [est.values.v21, est.values.v30, est.values.p_sum]
        )
        inverse = _closed_inverse_21
        names = ("gamma_dist", "gamma_phase", "gamma_mix")
        unidentified: tuple[str, ...] = ()
    else:
        gamma_dist, gamma_mix, ident = invert_22(est.values, tolerance=tolerance)
        params = DecoherenceParams(gamma_dist, 1.0, gamma_mix)
        model = observables_22_from_params(params)
        residual = max(
            abs(model.p13 - est.values.p13), abs(model.p22 - est.values.p22)
        )
        surviving = None
        if ident is Identifiability.DEGENERATE_FULL_DECOHERENCE:
            surviving = {"gamma_dist*gamma_mix": gamma_dist * gamma_mix}
        result = DiagnosisResult(
            params=params,
            identifiability=ident,
            residual=residual,
            surviving_products=surviving,
        )
        obs_point = np.array([est.values.p13, est.values.p22])
        inverse = _closed_inverse_22
        names = ("gamma_dist", "gamma_mix")
        unidentified = ("gamma_phase",)

    std_errors: dict[str, float] = {}
    if result.identifiability is Identifiability.UNIQUE:
        jac = _numerical_jacobian(inverse, obs_point)
        param_cov = jac @ est.covariance @ jac.T
        diag = np.sqrt(np.clip(np.diag(param_cov), 0.0, None))
        std_errors = {name: float(err) for name, err in zip(names, diag)}
    return RunDiagnosis(
        state=state,
        observables=est,
        diagnosis=result,
        std_errors=std_errors,
        region_tolerance=float(region_tolerance),
        unidentified=unidentified,
    )
