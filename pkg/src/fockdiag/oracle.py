"""Brute-force reference statistics by explicit amplitude enumeration.

This module recomputes beam-splitter outcome probabilities without the
exchange-coefficient polynomial: each number component is expanded over all
redistributions of its particles onto the output ports, tracking internal
states mode by mode. It exists to gate the analytic path; the two must agree
to near machine precision wherever both are defined.

The expansion works in the labeled Fock space over modes (output port,
internal basis index). A component |n1>_{1,phi} |n2>_{2,chi} is the
normalized image of (a1_phi^dag)^n1 (a2_chi^dag)^n2 / sqrt(n1! n2!) under
the balanced beam splitter

    a1_phi^dag -> (i b1_phi^dag + b2_phi^dag) / sqrt(2),
    a2_chi^dag -> (b1_chi^dag + i b2_chi^dag) / sqrt(2),

expanded multinomially into occupation configurations. Probabilities follow
by summing |amplitude|^2 (and cross terms between the two superposed
components) over configurations with a fixed port-1 particle count.

Because the beam splitter acts identically on every internal mode and the
detectors do not resolve internal states, the statistics of a pure branch
pair depend on the two internal states only through their mutual overlap;
:func:`oracle_distribution` therefore rewrites each branch pair in the
two-dimensional span of its internal states before expanding. The
general-dimension expansion is kept (:func:`component_expansion`) and the
reduction is itself cross-checked by tests.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from .decoherence import (
    DecoherenceParams,
    InternalEnsemble,
    PhaseMixture,
    decohere_ensembles,
)
from .errors import DomainError, EnsembleError
from .probability import InputState, OutcomeDistribution

__all__ = [
    "LabeledFockVector",
    "component_expansion",
    "oracle_distribution",
    "oracle_decohered_distribution",
    "MAX_ORACLE_TOTAL",
]

MAX_ORACLE_TOTAL = 12


@dataclass(frozen=True)
class LabeledFockVector:
    """State vector over occupation configurations of labeled modes.

    Modes are ordered (port 1, internal 0..d-1) then (port 2, internal
    0..d-1); a configuration is the tuple of occupations of all 2d modes.
    ``amplitudes`` maps configurations with nonzero amplitude to complex
    amplitudes in the normalized Fock basis.
    """

    dim: int
    amplitudes: Mapping[tuple[int, ...], complex]

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def port1_count(self, config: tuple[int, ...]) -> int:
        return sum(config[: self.dim])


def _linear_form(port: int, internal: np.ndarray) -> np.ndarray:
    """Beam-splitter image of one input-port creation operator.

    Returns coefficients over the 2d output modes; reflection into the
    same-numbered port carries the factor i.
    """
    d = internal.size
    out = np.zeros(2 * d, dtype=complex)
    amp = 1.0 / math.sqrt(2.0)
    if port == 1:
        out[:d] = 1j * amp * internal
        out[d:] = amp * internal
    elif port == 2:
        out[:d] = amp * internal
        out[d:] = 1j * amp * internal
    else:
        raise DomainError(f"port must be 1 or 2, got {port}")
    return out


def _poly_power(form: np.ndarray, power: int) -> dict[tuple[int, ...], complex]:
    """Multinomial expansion of (sum_m c_m b_m^dag)^power.

    Returns monomial exponent tuples over all modes mapped to their
    coefficients (including the multinomial factor power!/prod alpha_m!).
    """
    size = form.size
    active = [(idx, complex(form[idx])) for idx in range(size) if form[idx] != 0]
    out: dict[tuple[int, ...], complex] = {}
    if power == 0:
        out[(0,) * size] = 1.0 + 0.0j
        return out
    if not active:
        return out
    power_fact = math.factorial(power)
    exponents = [0] * size

    def descend(pos: int, remaining: int, coeff: complex) -> None:
        idx, value = active[pos]
        if pos == len(active) - 1:
            exponents[idx] = remaining
            key = tuple(exponents)
            term = coeff * value**remaining / math.factorial(remaining)
            out[key] = out.get(key, 0.0 + 0.0j) + power_fact * term
            exponents[idx] = 0
            return
        for take in range(remaining + 1):
            exponents[idx] = take
            descend(pos + 1, remaining - take, coeff * value**take / math.factorial(take))
        exponents[idx] = 0

    descend(0, power, 1.0 + 0.0j)
    return out


def component_expansion(
    n1: int, n2: int, upper: np.ndarray, lower: np.ndarray
) -> LabeledFockVector:
    """Beam-splitter image of |n1>_{1,upper} |n2>_{2,lower}, normalized.

    ``upper`` and ``lower`` are unit internal-state vectors of equal
    dimension d; the result lives on 2d labeled modes and has unit norm.
    """
    upper = np.asarray(upper, dtype=complex)
    lower = np.asarray(lower, dtype=complex)
    if upper.shape != lower.shape or upper.ndim != 1:
        raise EnsembleError("internal vectors must be 1-d and share a dimension")
    if n1 < 0 or n2 < 0:
        raise DomainError(f"occupations must be non-negative, got ({n1}, {n2})")
    poly1 = _poly_power(_linear_form(1, upper), n1)
    poly2 = _poly_power(_linear_form(2, lower), n2)
    raw: dict[tuple[int, ...], complex] = {}
    for exp1, c1 in poly1.items():
        for exp2, c2 in poly2.items():
            key = tuple(a + b for a, b in zip(exp1, exp2))
            raw[key] = raw.get(key, 0.0 + 0.0j) + c1 * c2
    scale = 1.0 / math.sqrt(math.factorial(n1) * math.factorial(n2))
    amplitudes: dict[tuple[int, ...], complex] = {}
    for key, coeff in raw.items():
        if coeff == 0:
            continue
        weight = scale * math.sqrt(math.prod(math.factorial(occ) for occ in key))
        amplitudes[key] = coeff * weight
    return LabeledFockVector(upper.size, amplitudes)


def _channel_components(
    comp1: LabeledFockVector, comp2: LabeledFockVector, total: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-channel direct terms and the cross term between two components.

    Returns (A, B, C) with A[s1] = sum |a1|^2, C[s1] = sum |a2|^2 and
    B[s1] = sum conj(a1) a2, each restricted to configurations with s1
    particles on port 1. Configurations are visited in lexicographic order
    so results are bit-for-bit reproducible.
    """
    direct1 = np.zeros(total + 1)
    direct2 = np.zeros(total + 1)
    cross = np.zeros(total + 1, dtype=complex)
    zero = 0.0 + 0.0j
    for config in sorted(set(comp1.amplitudes) | set(comp2.amplitudes)):
        s1 = comp1.port1_count(config)
        a1 = comp1.amplitudes.get(config, zero)
        a2 = comp2.amplitudes.get(config, zero)
        direct1[s1] += abs(a1) ** 2
        direct2[s1] += abs(a2) ** 2
        cross[s1] += a1.conjugate() * a2
    return direct1, cross, direct2


@lru_cache(maxsize=None)
def _pair_statistics(
    n: int, m: int, overlap_re: float, overlap_im: float, twin: bool
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cached (A, B, C) for one branch pair, reduced to the overlap span.

    The branch statistics depend on the internal pair only through the
    overlap g = <upper|lower>, so the pair is represented as (1, 0) and
    (g, sqrt(1 - |g|^2)) in two internal dimensions before expansion.
    """
    overlap = complex(overlap_re, overlap_im)
    ortho = math.sqrt(max(0.0, 1.0 - abs(overlap) ** 2))
    upper = np.array([1.0, 0.0], dtype=complex)
    lower = np.array([overlap, ortho], dtype=complex)
    total = n + m
    comp1 = component_expansion(n, m, upper, lower)
    if twin:
        direct1, cross, direct2 = _channel_components(comp1, comp1, total)
    else:
        comp2 = component_expansion(m, n, upper, lower)
        direct1, cross, direct2 = _channel_components(comp1, comp2, total)
    for arr in (direct1, cross, direct2):
        arr.setflags(write=False)
    return direct1, cross, direct2


def oracle_distribution(
    state: InputState,
    upper: InternalEnsemble,
    lower: InternalEnsemble,
    phase_mixture: PhaseMixture | None,
    eta: float,
) -> OutcomeDistribution:
    """Outcome distribution by explicit enumeration over all branches.

    Averages the pure-branch statistics over the two arm ensembles and the
    relative-phase mixture. For the superposition state the two number
    components are recombined coherently per branch,

        P(s1) = (A(s1) + C(s1)) / 2 + Re[ e^(i(N-M)(eta+eta_r)) B(s1) ],

    while the twin-Fock state uses its single component (phase drops out).
    Enforces N + M <= ``MAX_ORACLE_TOTAL``; cost grows combinatorially.
    """
    if state.total > MAX_ORACLE_TOTAL:
        raise DomainError(
            f"oracle limited to N+M <= {MAX_ORACLE_TOTAL}, got {state.total}"
        )
    if upper.dimension != lower.dimension:
        raise EnsembleError(
            f"ensemble dimensions differ: {upper.dimension} != {lower.dimension}"
        )
    mixture = phase_mixture if phase_mixture is not None else PhaseMixture.trivial()
    total = state.total
    harmonic = state.n - state.m
    probs = np.zeros(total + 1)
    for w_u, vec_u in upper.branches:
        for w_l, vec_l in lower.branches:
            weight = w_u * w_l
            if weight == 0.0:
                continue
            overlap = complex(np.vdot(vec_u, vec_l))
            direct1, cross, direct2 = _pair_statistics(
                state.n, state.m, overlap.real, overlap.imag, state.is_twin_fock
            )
            if state.is_twin_fock:
                probs += weight * direct1
                continue
            mean = 0.5 * (direct1 + direct2)
            for w_p, offset in mixture.branches:
                if w_p == 0.0:
                    continue
                z = cmath.exp(1j * harmonic * (float(eta) + offset))
                probs += (weight * w_p) * (mean + (z * cross).real)
    probs = np.clip(probs, 0.0, None)
    return OutcomeDistribution(state, float(eta), tuple(float(p) for p in probs))


def oracle_decohered_distribution(
    state: InputState,
    pure_overlap: float,
    params: DecoherenceParams,
    eta: float,
) -> OutcomeDistribution:
    """Reference distribution for a decohered preparation, built explicitly.

    Starts from pure internal states with real overlap ``pure_overlap``,
    applies the three-parameter decoherence construction, and enumerates the
    result. The effective overlap entering the statistics is
    pure_overlap * gamma_dist; with ``pure_overlap = 1`` this is the direct
    cross-check of the closed-form overlap-power table.
    """
    pure_overlap = float(pure_overlap)
    if not -1.0 <= pure_overlap <= 1.0:
        raise DomainError(f"pure_overlap must lie in [-1, 1], got {pure_overlap!r}")
    ortho = math.sqrt(max(0.0, 1.0 - pure_overlap**2))
    upper = InternalEnsemble.pure(np.array([1.0, 0.0], dtype=complex))
    lower = InternalEnsemble.pure(np.array([pure_overlap, ortho], dtype=complex))
    up, low, mixture = decohere_ensembles(upper, lower, params, state.total)
    return oracle_distribution(state, up, low, mixture, eta)
