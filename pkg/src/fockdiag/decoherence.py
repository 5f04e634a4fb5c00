"""Decoherence model and averaged scalar-product powers.

Two-mode interference experiments with partially coherent sources are
described here by ensemble averages of powers of the internal-state overlap

    aspp(m, k) = << |<phi|phi~>|^(2m) * <phi|phi~>^k >>,

where phi, phi~ are the internal (spectral, spatial, ...) states fed into the
two input ports and << >> averages over the preparation ensemble and over a
random relative phase between the two superposed particle-number components.
Every outcome probability downstream is a polynomial in these numbers, so the
pair (table of aspp values, input state) fully determines the statistics.

Three independent imperfections are modelled, each with a strength in [0, 1]
(1 = ideal, 0 = fully decohered):

``gamma_dist``
    Distinguishability. The second source's internal state is rotated partly
    onto a fresh orthogonal axis, phi~ -> gamma*phi~ + sqrt(1-gamma^2)*e_new,
    which scales every overlap by gamma and therefore aspp(m, k) by
    gamma^(2m+k).

``gamma_mix``
    Mixedness. Each arm keeps its state with probability gamma and is
    replaced by a fresh orthogonal state with probability 1-gamma; only the
    keep-keep branch of the product ensemble contributes, giving a uniform
    factor gamma^2 on every entry with (m, k) != (0, 0).

``gamma_phase``
    Phase coherence between the two number components. With probability
    gamma the relative phase is fixed; otherwise it is drawn uniformly from
    an exact averaging grid, which annihilates every entry with k >= 1 except
    for the coherent fraction, giving a factor gamma on k >= 1 entries only.

The closed form implemented by :func:`aspp_from_params`,

    aspp(m, k) = gamma_phase^[k>=1] * gamma_mix^2 * gamma_dist^(2m+k)
    (for (m, k) != (0, 0); aspp(0, 0) = 1 always),

is reproduced constructively by :func:`decohere_ensembles` +
:func:`aspp_from_ensembles`, which build explicit ensembles in an enlarged
internal space. The constructive path exists so that the closed form can be
cross-checked and so the brute-force oracle can consume the same ensembles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, EnsembleError, MissingAsppError

__all__ = [
    "DecoherenceParams",
    "InternalEnsemble",
    "PhaseMixture",
    "AsppTable",
    "JensenViolation",
    "aspp_from_params",
    "aspp_from_ensembles",
    "effective_aspp",
    "jensen_bounds_check",
    "decohere_ensembles",
    "apply_distinguishability",
    "apply_mixing",
    "compose_dephasing",
]

_UNIT_INTERVAL_TOL = 1e-12
_REALNESS_TOL = 1e-10


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < -_UNIT_INTERVAL_TOL or value > 1.0 + _UNIT_INTERVAL_TOL:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class DecoherenceParams:
    """Strength triple (gamma_dist, gamma_phase, gamma_mix), each in [0, 1]."""

    gamma_dist: float
    gamma_phase: float
    gamma_mix: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma_dist", _check_unit_interval("gamma_dist", self.gamma_dist))
        object.__setattr__(self, "gamma_phase", _check_unit_interval("gamma_phase", self.gamma_phase))
        object.__setattr__(self, "gamma_mix", _check_unit_interval("gamma_mix", self.gamma_mix))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.gamma_dist, self.gamma_phase, self.gamma_mix)

    @classmethod
    def ideal(cls) -> "DecoherenceParams":
        return cls(1.0, 1.0, 1.0)


@dataclass(frozen=True)
class InternalEnsemble:
    """Statistical mixture of pure internal states for one input arm.

    ``branches`` is a sequence of (weight, vector) pairs. Weights must be
    non-negative and sum to 1 within 1e-12; vectors must share one dimension
    and be unit-normalized within 1e-12. Vectors are stored as read-only
    complex numpy arrays.
    """

    branches: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self) -> None:
        if not self.branches:
            raise EnsembleError("ensemble needs at least one branch")
        cleaned: list[tuple[float, np.ndarray]] = []
        dim: int | None = None
        total = 0.0
        for weight, vector in self.branches:
            weight = float(weight)
            if not math.isfinite(weight) or weight < -_UNIT_INTERVAL_TOL:
                raise EnsembleError(f"branch weight must be non-negative, got {weight!r}")
            vec = np.asarray(vector, dtype=complex)
            if vec.ndim != 1 or vec.size == 0:
                raise EnsembleError("branch vectors must be non-empty 1-d arrays")
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise EnsembleError(
                    f"branch dimension mismatch: {vec.size} != {dim}"
                )
            norm = float(np.linalg.norm(vec))
            if abs(norm - 1.0) > 1e-12:
                raise EnsembleError(f"branch vector norm {norm!r} != 1")
            vec.setflags(write=False)
            cleaned.append((max(weight, 0.0), vec))
            total += weight
        if abs(total - 1.0) > 1e-12:
            raise EnsembleError(f"branch weights sum to {total!r}, expected 1")
        object.__setattr__(self, "branches", tuple(cleaned))

    @property
    def dimension(self) -> int:
        return self.branches[0][1].size

    @classmethod
    def pure(cls, vector: Sequence[complex]) -> "InternalEnsemble":
        """Single-branch ensemble holding one pure state."""
        return cls(((1.0, np.asarray(vector, dtype=complex)),))

    def is_pure(self) -> bool:
        return len(self.branches) == 1

    def density_matrix(self) -> np.ndarray:
        """Sum_j w_j |psi_j><psi_j| as a dense array (testing aid)."""
        rho = np.zeros((self.dimension, self.dimension), dtype=complex)
        for weight, vec in self.branches:
            rho += weight * np.outer(vec, vec.conj())
        return rho


@dataclass(frozen=True)
class PhaseMixture:
    """Discrete mixture of relative-phase offsets between number components.

    ``branches`` holds (weight, eta_random) pairs; weights sum to 1 within
    1e-12. The offset adds to the interferometer phase eta wherever the
    relative phase of the two superposed components enters.
    """

    branches: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.branches:
            raise EnsembleError("phase mixture needs at least one branch")
        cleaned = []
        total = 0.0
        for weight, offset in self.branches:
            weight = float(weight)
            offset = float(offset)
            if not math.isfinite(weight) or weight < -_UNIT_INTERVAL_TOL:
                raise EnsembleError(f"phase weight must be non-negative, got {weight!r}")
            if not math.isfinite(offset):
                raise EnsembleError("phase offset must be finite")
            cleaned.append((max(weight, 0.0), offset))
            total += weight
        if abs(total - 1.0) > 1e-12:
            raise EnsembleError(f"phase weights sum to {total!r}, expected 1")
        object.__setattr__(self, "branches", tuple(cleaned))

    @classmethod
    def trivial(cls) -> "PhaseMixture":
        """Deterministic zero offset (fully phase coherent)."""
        return cls(((1.0, 0.0),))

    @classmethod
    def dephasing(cls, gamma_phase: float, total: int) -> "PhaseMixture":
        """Partially coherent phase: weight gamma on a fixed phase, the rest
        spread over a K-point grid with K = 2*total + 1.

        The grid size makes the average of exp(i*k*eta) vanish exactly for
        every harmonic 0 < |k| <= 2*total, so the construction reproduces the
        closed-form attenuation gamma for all entries a state with ``total``
        particles can probe.
        """
        gamma = _check_unit_interval("gamma_phase", gamma_phase)
        if total < 0:
            raise DomainError(f"total must be non-negative, got {total}")
        if gamma == 1.0:
            return cls.trivial()
        points = 2 * int(total) + 1
        branches: list[tuple[float, float]] = []
        if gamma > 0.0:
            branches.append((gamma, 0.0))
        spread = (1.0 - gamma) / points
        branches.extend((spread, 2.0 * math.pi * j / points) for j in range(points))
        return cls(tuple(branches))

    def attenuation(self, k: int) -> complex:
        """<< exp(i*k*eta_random) >> over the mixture."""
        return sum(w * cmath.exp(1j * k * offset) for w, offset in self.branches)


@dataclass(frozen=True)
class AsppTable:
    """Lookup table of averaged scalar-product powers keyed by (m, k).

    The entry (0, 0) is forced to 1 (empty average). Other values are stored
    as given; the nominal physical range [0, 1] under a real-overlap
    convention is enforced by physicality checks where it matters, not here,
    so that noisy estimates remain representable.
    """

    entries: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        normalized: dict[tuple[int, int], float] = {}
        for key, value in dict(self.entries).items():
            m, k = key
            m, k = int(m), int(k)
            if m < 0 or k < 0:
                raise DomainError(f"aspp key must be non-negative, got ({m}, {k})")
            value = float(value)
            if not math.isfinite(value):
                raise DomainError(f"aspp entry ({m}, {k}) is not finite: {value!r}")
            normalized[(m, k)] = value
        anchored = normalized.get((0, 0), 1.0)
        if abs(anchored - 1.0) > 1e-12:
            raise DomainError(f"aspp entry (0, 0) must equal 1, got {anchored!r}")
        normalized[(0, 0)] = 1.0
        object.__setattr__(self, "entries", normalized)

    def value(self, m: int, k: int) -> float:
        try:
            return self.entries[(int(m), int(k))]
        except KeyError:
            raise MissingAsppError(m, k) from None

    @property
    def pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.entries)

    def items(self) -> Iterable[tuple[tuple[int, int], float]]:
        return self.entries.items()

    @classmethod
    def from_params(
        cls, params: DecoherenceParams, pairs: Iterable[tuple[int, int]]
    ) -> "AsppTable":
        return cls({pair: aspp_from_params(params, *pair) for pair in pairs})

    @classmethod
    def from_ensembles(
        cls,
        upper: InternalEnsemble,
        lower: InternalEnsemble,
        pairs: Iterable[tuple[int, int]],
        phase_mixture: PhaseMixture | None = None,
    ) -> "AsppTable":
        mixture = phase_mixture if phase_mixture is not None else PhaseMixture.trivial()
        return cls(
            {pair: effective_aspp(upper, lower, mixture, *pair) for pair in pairs}
        )


def aspp_from_params(params: DecoherenceParams, m: int, k: int) -> float:
    """Closed-form averaged overlap power under the three-parameter model.

    aspp(0, 0) = 1; for k >= 1 the phase average contributes gamma_phase, the
    keep-keep mixing branch contributes gamma_mix^2, and each of the 2m + k
    overlap factors contributes gamma_dist. Entries with k = 0 carry no phase
    factor because they are phase-insensitive moduli.
    """
    m, k = int(m), int(k)
    if m < 0 or k < 0:
        raise DomainError(f"power indices must be non-negative, got ({m}, {k})")
    if m == 0 and k == 0:
        return 1.0
    value = params.gamma_mix**2 * params.gamma_dist ** (2 * m + k)
    if k >= 1:
        value *= params.gamma_phase
    return value


def _aspp_complex(
    upper: InternalEnsemble, lower: InternalEnsemble, m: int, k: int
) -> complex:
    if upper.dimension != lower.dimension:
        raise EnsembleError(
            f"ensemble dimensions differ: {upper.dimension} != {lower.dimension}"
        )
    acc = 0.0 + 0.0j
    for w_u, vec_u in upper.branches:
        for w_l, vec_l in lower.branches:
            overlap = complex(np.vdot(vec_u, vec_l))
            acc += w_u * w_l * abs(overlap) ** (2 * m) * overlap**k
    return acc


def aspp_from_ensembles(
    upper: InternalEnsemble, lower: InternalEnsemble, m: int, k: int
) -> float:
    """Ensemble average sum_jl w_j w~_l |<psi_j|psi~_l>|^(2m) <psi_j|psi~_l>^k.

    The result must be real within 1e-10 (the real-overlap convention); a
    larger imaginary part indicates ensembles outside the model's scope and
    raises :class:`EnsembleError`.
    """
    m, k = int(m), int(k)
    if m < 0 or k < 0:
        raise DomainError(f"power indices must be non-negative, got ({m}, {k})")
    value = _aspp_complex(upper, lower, m, k)
    if abs(value.imag) >= _REALNESS_TOL:
        raise EnsembleError(
            f"averaged overlap power ({m}, {k}) is not real: imag={value.imag!r}"
        )
    return value.real


def effective_aspp(
    upper: InternalEnsemble,
    lower: InternalEnsemble,
    phase_mixture: PhaseMixture,
    m: int,
    k: int,
) -> float:
    """Averaged overlap power including the random relative phase.

    A phase offset eta_r multiplies each overlap factor entering the k-th
    power by exp(i*eta_r), so the mixture contributes the factor
    << exp(i*k*eta_r) >>; the modulus powers are phase-blind.
    """
    m, k = int(m), int(k)
    if m < 0 or k < 0:
        raise DomainError(f"power indices must be non-negative, got ({m}, {k})")
    value = _aspp_complex(upper, lower, m, k)
    if k:
        value *= phase_mixture.attenuation(k)
    if abs(value.imag) >= _REALNESS_TOL:
        raise EnsembleError(
            f"averaged overlap power ({m}, {k}) is not real: imag={value.imag!r}"
        )
    return value.real


@dataclass(frozen=True)
class JensenViolation:
    """One failed moment inequality between stored modulus powers.

    ``bound`` is "lower" for t(m1)^(m2/m1) <= t(m2), "upper" for
    t(m2) <= t(m1), and "nonnegative" for t(m) >= 0. ``deficit`` is the
    (positive) amount by which the bound failed.
    """

    m_small: int
    m_large: int
    bound: str
    deficit: float


def jensen_bounds_check(
    table: AsppTable, tolerance: float = 1e-10
) -> tuple[JensenViolation, ...]:
    """Check moment consistency of the modulus entries (m, 0), m >= 1.

    For a genuine ensemble average of |overlap|^(2m) with |overlap| <= 1 the
    sequence is non-increasing in m and bounded below by the Jensen power of
    any lower moment: t(m1)^(m2/m1) <= t(m2) <= t(m1) for m1 <= m2. Returns
    the violations found (empty tuple when consistent).
    """
    moments = sorted(
        (m, value) for (m, k), value in table.items() if k == 0 and m >= 1
    )
    violations: list[JensenViolation] = []
    for m, value in moments:
        if value < -tolerance:
            violations.append(JensenViolation(m, m, "nonnegative", -value))
    for i, (m1, t1) in enumerate(moments):
        for m2, t2 in moments[i + 1 :]:
            if t2 > t1 + tolerance:
                violations.append(JensenViolation(m1, m2, "upper", t2 - t1))
            if t1 > tolerance:
                floor = t1 ** (m2 / m1)
                if t2 < floor - tolerance:
                    violations.append(JensenViolation(m1, m2, "lower", floor - t2))
    return tuple(violations)


def _embed(vector: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros(dim, dtype=complex)
    out[: vector.size] = vector
    return out


def _basis_vector(dim: int, index: int) -> np.ndarray:
    out = np.zeros(dim, dtype=complex)
    out[index] = 1.0
    return out


def apply_distinguishability(
    upper: InternalEnsemble, lower: InternalEnsemble, gamma_dist: float
) -> tuple[InternalEnsemble, InternalEnsemble]:
    """Rotate every lower-arm branch partly onto one fresh orthogonal axis.

    Appends one dimension (unless gamma_dist == 1) and maps each lower branch
    v -> gamma*v + sqrt(1-gamma^2)*e_new, scaling all upper-lower overlaps by
    gamma. The upper ensemble is only re-embedded.
    """
    gamma = _check_unit_interval("gamma_dist", gamma_dist)
    if upper.dimension != lower.dimension:
        raise EnsembleError(
            f"ensemble dimensions differ: {upper.dimension} != {lower.dimension}"
        )
    if gamma == 1.0:
        return upper, lower
    dim = upper.dimension + 1
    fresh = _basis_vector(dim, dim - 1)
    ortho = math.sqrt(max(0.0, 1.0 - gamma * gamma))
    new_upper = InternalEnsemble(
        tuple((w, _embed(v, dim)) for w, v in upper.branches)
    )
    new_lower = InternalEnsemble(
        tuple((w, gamma * _embed(v, dim) + ortho * fresh) for w, v in lower.branches)
    )
    return new_upper, new_lower


def apply_mixing(
    upper: InternalEnsemble, lower: InternalEnsemble, gamma_mix: float
) -> tuple[InternalEnsemble, InternalEnsemble]:
    """Mix each arm with a fresh orthogonal state at weight 1 - gamma_mix.

    Appends one dimension per arm that actually mixes. Per arm the output is
    {(gamma, kept state branches), (1-gamma, fresh orthogonal vector)}; the
    joint upper x lower ensemble therefore has the four-branch weight pattern
    (gamma^2, gamma(1-gamma), gamma(1-gamma), (1-gamma)^2) when both arms
    were pure, and only the keep-keep branch retains any mutual overlap.
    """
    gamma = _check_unit_interval("gamma_mix", gamma_mix)
    if upper.dimension != lower.dimension:
        raise EnsembleError(
            f"ensemble dimensions differ: {upper.dimension} != {lower.dimension}"
        )
    if gamma == 1.0:
        return upper, lower
    extra = 2
    dim = upper.dimension + extra
    fresh_upper = _basis_vector(dim, dim - 2)
    fresh_lower = _basis_vector(dim, dim - 1)

    def _mix(
        ensemble: InternalEnsemble, fresh: np.ndarray
    ) -> InternalEnsemble:
        branches: list[tuple[float, np.ndarray]] = []
        if gamma > 0.0:
            branches.extend((gamma * w, _embed(v, dim)) for w, v in ensemble.branches)
        branches.append((1.0 - gamma, fresh))
        return InternalEnsemble(tuple(branches))

    return _mix(upper, fresh_upper), _mix(lower, fresh_lower)


def compose_dephasing(
    mixture: PhaseMixture, gamma_phase: float, total: int
) -> PhaseMixture:
    """Convolve an existing phase mixture with the dephasing construction."""
    extra = PhaseMixture.dephasing(gamma_phase, total)
    if len(mixture.branches) == 1 and mixture.branches[0][1] == 0.0:
        return extra
    branches = tuple(
        (w1 * w2, o1 + o2)
        for w1, o1 in mixture.branches
        for w2, o2 in extra.branches
        if w1 * w2 > 0.0
    )
    return PhaseMixture(branches)


def decohere_ensembles(
    pure_upper: InternalEnsemble,
    pure_lower: InternalEnsemble,
    params: DecoherenceParams,
    total: int,
) -> tuple[InternalEnsemble, InternalEnsemble, PhaseMixture]:
    """Apply all three decoherence mechanisms to a pure preparation.

    Takes single-branch ensembles for the two arms, enlarges the internal
    space as needed (at most three fresh axes), and returns the decohered
    arm ensembles together with the phase mixture for a ``total``-particle
    input. Ideal parameters return ensembles with the input vectors unchanged
    and a trivial mixture. The three constructions commute at the level of
    the averaged overlap powers they induce.
    """
    if not (pure_upper.is_pure() and pure_lower.is_pure()):
        raise EnsembleError("decohere_ensembles expects single-branch (pure) inputs")
    if total < 0:
        raise DomainError(f"total must be non-negative, got {total}")
    upper, lower = apply_distinguishability(pure_upper, pure_lower, params.gamma_dist)
    upper, lower = apply_mixing(upper, lower, params.gamma_mix)
    mixture = PhaseMixture.dephasing(params.gamma_phase, total)
    return upper, lower, mixture
