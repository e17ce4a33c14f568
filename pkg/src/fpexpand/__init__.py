"""Exact counting experiments for expander functions f(x, y) = g(x)(h(x) + y) over F_p."""
from .energy import EnergyReport, LambdaCounts, Variant, energy_report, lambda_counts, verify_lambda_identity
from .field import FieldElement, PrimeField, add, inv, mul
from .functions import (
    ExpanderSpec,
    FunctionTable,
    constant,
    eval_f,
    identity,
    image_f,
    inverse,
    monomial,
    mu,
    parse_family,
    pointwise_product,
)
from .incidence import (
    IncidenceReport,
    build_R,
    build_S,
    count_incidences,
    count_incidences_naive,
    incidence_report,
    k_paper_bound,
    max_collinear,
    p2_gate,
    rudnev_rhs,
)
from .sets import FSet, SetFamilySpec, generate, hypothesis_gate, productset, sumset
from .theorems import (
    ChainViolation,
    compare_bounds,
    conditional_growth_check,
    hh_add_bound,
    hh_mult_bound,
    new_bound,
    verify_theorem,
)

__version__ = "0.1.0"
