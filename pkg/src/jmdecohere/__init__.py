"""Joint measurability of quantum observables under decoherence."""
from .crittime import (
    CriticalTime,
    critical_time,
    dephasing_closed_form,
    depolarizing_all_n_bound,
    depolarizing_bound,
    eb_bound,
    generic_bound,
    scan_compatibility,
)
from .dynamics import (
    DecoherencePartition,
    DecoherenceRates,
    Generator,
    SchurGenerator,
    conditional_expectation,
    decoherence_rates,
    dephasing_generator,
    depolarizing_generator,
    evolve,
    gkls_generator,
    schur_generator,
)
from .feasibility import SolverOptions
from .jmcheck import (
    JmVerdict,
    Status,
    busch_unbiased,
    envelope_check,
    envelope_joint,
    jm_feasibility,
    mmatrix_sufficient,
    schur_jm_feasibility,
    tradeoff_necessary,
)
from .observables import BiObservable, BlochEffect, Observable, validate

__all__ = [
    "BiObservable", "BlochEffect", "CriticalTime", "DecoherencePartition", "DecoherenceRates",
    "Generator", "JmVerdict", "Observable", "SchurGenerator", "SolverOptions", "Status",
    "busch_unbiased", "conditional_expectation", "critical_time", "decoherence_rates",
    "dephasing_closed_form", "dephasing_generator", "depolarizing_all_n_bound", "depolarizing_bound",
    "depolarizing_generator", "eb_bound", "envelope_check", "envelope_joint", "evolve",
    "generic_bound", "gkls_generator", "jm_feasibility", "mmatrix_sufficient", "scan_compatibility",
    "schur_generator", "schur_jm_feasibility", "tradeoff_necessary", "validate",
]
