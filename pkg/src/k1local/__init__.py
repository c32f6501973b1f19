"""Descent and Picard spectral sequences of the K(1)-local category.

Exact p-adic arithmetic, continuous cohomology of the height-one
groups with brute-force oracles, a generic bigraded spectral-sequence
engine with decalage verification, and extraction of the Picard group,
its algebraic and exotic parts, and the relative Brauer bound.
"""

from .cohomology import (
    Sum,
    TrivialCyclic,
    TrivialZ2tor,
    TwistedFinite,
    TwistedZp,
    cohomology_finite_cyclic,
    cohomology_procyclic,
    cohomology_units,
    parse_coefficient,
    pic_coefficient,
    units_coefficient,
)
from .engine import (
    ClassSelector,
    Differential,
    ExtensionRecord,
    Page,
    Window,
    assemble_stem,
    run_to_collapse,
    turn_page,
)
from .errors import (
    AtPrecision,
    DataFileError,
    InconsistentTable,
    KLocalError,
    NotAComplex,
    NotAUnit,
    PrecisionExhausted,
    PrimeMismatch,
    TooLarge,
    TruncatedError,
    Unsupported,
    ZeroWeight,
)
from .fgmod import (
    FgZpModule,
    ModuleMap,
    cokernel,
    direct_sum,
    homology_at,
    kernel,
    smith_normal_form,
)
from .filtered import (
    FilteredComplex,
    decalage,
    decalage_check,
    random_filtered_complex,
    ss_of_filtration,
)
from .heightone import (
    RingClass,
    ass_e2,
    ass_run,
    brauer_bound,
    extract_pic,
    import_differentials,
    nonlinear_differential,
    picard_e2,
    picard_run,
    ring_class_at,
)
from .oracle import brute_force_cohomology, stabilized_cohomology
from .padic import (
    PAdic,
    UnitDecomposition,
    generator_weight_valuation,
    teichmuller,
    unit_decomposition,
    unit_pow,
    valuation,
)

__version__ = "0.1.0"
