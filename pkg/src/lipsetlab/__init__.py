"""lipsetlab: exact rational interval-set measure calculus.

Interval sets with exact Lebesgue measure, certified measure oracles for
middle-interval constructions, one-sided density cores and their
certificates, a piecewise-linear oscillation engine, and a staged builder
for 1-Lipschitz functions whose steep set tracks a target set.
"""

from .intervals import Interval, IntervalSet, as_rational, combine, normalize, symdiff_measure
from .oracles import Enclosure, FiniteOracle, MeasureBounds, MeasureOracle, UnionOracle
from .cantor import (
    AlphaRule,
    CantorOracle,
    CantorParams,
    CantorSpec,
    PackedSpec,
    gap_report,
    halving_rule,
    pack,
    params,
    stage,
)
from .density import (
    CertificateSeq,
    DensityQuery,
    EgdVerdict,
    certificate_check,
    egd_member,
    egd_region,
    onesided_failure_scan,
    side_density,
    wnd_witness,
)
from .plfuncs import PLFunction, growth_check, lip_pl, lip_profile, mf, sup_norm_diff
from .builder import (
    BuildKnobs,
    BuilderState,
    build_stage,
    build_stages,
    init_stage0,
    limit_function,
    refine_dense_open,
    verify_conditions,
)

__version__ = "0.1.0"
