"""Beam-splitter statistics for double-Fock superposition states and
differential diagnosis of decoherence mechanisms.

The package computes exact outcome distributions of |N:M> superposition and
|N, N> twin-Fock inputs on a balanced beam splitter under a three-parameter
decoherence model (distinguishability, mixedness, dephasing), provides a
brute-force enumeration oracle for cross-checking, and inverts measured
low-order signals back to the decoherence parameters with uncertainties.
"""

from .decoherence import (
    AsppTable,
    DecoherenceParams,
    InternalEnsemble,
    JensenViolation,
    PhaseMixture,
    aspp_from_ensembles,
    aspp_from_params,
    decohere_ensembles,
    effective_aspp,
    jensen_bounds_check,
)
from .diagnosis import (
    DiagnosisResult,
    Identifiability,
    Observables21,
    Observables22,
    infer_aspps,
    invert_21,
    invert_22,
    observables_21,
    observables_21_from_params,
    observables_22,
    observables_22_from_params,
    signed_visibility,
)
from .errors import (
    CountDataError,
    DomainError,
    EnsembleError,
    FockDiagError,
    MissingAsppError,
    ProbabilityError,
    RankDeficientError,
    VisibilityUndefinedError,
)
from .experiment import (
    CountRecord,
    EstimatedObservables,
    RunDiagnosis,
    diagnose_run,
    estimate_observables,
    sample_counts,
)
from .oracle import (
    LabeledFockVector,
    component_expansion,
    oracle_decohered_distribution,
    oracle_distribution,
)
from .probability import (
    CoefficientTable,
    InputKind,
    InputState,
    Outcome,
    OutcomeDistribution,
    SignalCurve,
    classical_distribution,
    coefficient_table,
    curve_from_params,
    distribution_from_params,
    event_probability,
    exchange_coefficient,
    exchange_coefficients,
    outcome_distribution,
    phase_grid,
    required_aspp_pairs,
    signal_curve,
)

__version__ = "0.1.0"

__all__ = [
    "AsppTable",
    "CoefficientTable",
    "CountDataError",
    "CountRecord",
    "DecoherenceParams",
    "DiagnosisResult",
    "DomainError",
    "EnsembleError",
    "EstimatedObservables",
    "FockDiagError",
    "Identifiability",
    "InputKind",
    "InputState",
    "InternalEnsemble",
    "JensenViolation",
    "LabeledFockVector",
    "MissingAsppError",
    "Observables21",
    "Observables22",
    "Outcome",
    "OutcomeDistribution",
    "PhaseMixture",
    "ProbabilityError",
    "RankDeficientError",
    "RunDiagnosis",
    "SignalCurve",
    "VisibilityUndefinedError",
    "aspp_from_ensembles",
    "aspp_from_params",
    "classical_distribution",
    "coefficient_table",
    "component_expansion",
    "curve_from_params",
    "decohere_ensembles",
    "diagnose_run",
    "distribution_from_params",
    "effective_aspp",
    "estimate_observables",
    "event_probability",
    "exchange_coefficient",
    "exchange_coefficients",
    "infer_aspps",
    "invert_21",
    "invert_22",
    "jensen_bounds_check",
    "observables_21",
    "observables_21_from_params",
    "observables_22",
    "observables_22_from_params",
    "oracle_decohered_distribution",
    "oracle_distribution",
    "outcome_distribution",
    "phase_grid",
    "required_aspp_pairs",
    "sample_counts",
    "signal_curve",
    "signed_visibility",
]
