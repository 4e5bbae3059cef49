"""Exact and asymptotic return probabilities for reflected random walks on N0.

The chain X_{n+1} = |X_n + Y_{n+1}| is driven by a finitely supported integer
increment law. This package computes its n-step laws exactly, factorizes the
associated ladder structure in closed form, and assembles the n -> infinity
return-probability constants, each cross-checked against independent
dynamic-programming and Monte Carlo oracles.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticLaw,
    asymptotic_law,
    centered_constant,
    constant_report,
    drifted_constant,
    oracle_constant_centered,
    oracle_constant_drifted,
    predict,
    tilting_identity_check,
)
from .chain import (
    EvolutionTable,
    StepRow,
    excursion_series,
    excursion_table,
    n_step_series,
    n_step_table,
    reflection_time_table,
    step_row,
    verify_first_reflection_identity,
    verify_ladder_factorizations,
)
from .errors import (
    ConvergenceFailure,
    HorizonMismatch,
    HorizonTooLarge,
    InvalidLaw,
    NegativeDriftUnsupported,
    NoReflectionsObserved,
    NonPositiveArgument,
    NotCentered,
    NotInvertibleCentered,
    ReflectWalkError,
    RootClusterUnresolved,
    SingularSystem,
    SlopeMismatch,
    StationarityFailure,
)
from .fluctuation import (
    HalfLineTable,
    ascent_joint_table,
    descent_joint_table,
    stay_nonneg_table,
    stay_series,
)
from .laws import (
    HypothesisReport,
    LatticeLaw,
    Regime,
    TiltInfo,
    check_hypotheses,
    law_from_json,
    law_from_masses,
    load_law,
    mgf,
    minimize_mgf,
    moments,
    tilt,
)
from .montecarlo import Estimate, SimConfig, SimResult, estimate_nu, estimate_pxy, simulate
from .reflection import (
    ExcursionColumn,
    ReflectionCore,
    build_reflection_core,
    doeblin_kappa,
    dominant_eigenvalue,
    e_column,
    e_value,
    r_core,
    r_row,
    r_row_at_s,
    resolvent_apply,
    stationary_nu,
)
from .series import TruncatedSeries, delta_series, zero_series
from .wiener_hopf import (
    FactorPair,
    LadderSystem,
    SlopeTable,
    factorize_at,
    ladder_laws,
    richardson_slope,
    roots_z_pm,
    slopes,
)
