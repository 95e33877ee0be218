"""Edge digraphs, absorption, and CSP reductions on finite idempotent algebras."""

from .algebra import (
    BinaryRelation,
    derive_algebra,
    FiniteAlgebra,
    OperationTable,
    Partition,
    ValidationReport,
    enumerate_subuniverses,
    generate_subproduct,
    induced_subalgebra,
    is_subuniverse,
    link_structure,
    power_algebra,
    product_algebra,
    quotient_algebra,
    sg_closure,
    validate_algebra,
)
from .absorption import (
    absorption_report,
    bounded_projectivity,
    is_2_absorbing,
    is_3_absorbing,
)
from .axioms import AxiomReport, verify_edge_axioms, verify_edge_theorems
from .catalog import (
    a1,
    builtin_algebras,
    two_element_majority,
    two_element_semilattice,
    z2_minority,
)
from .congruences import (
    Homomorphism,
    affine_checks,
    centralizer_condition,
    congruences,
    homomorphisms_between,
    is_abelian,
    is_congruence,
    principal_congruence,
    unary_polynomials,
)
from .csp import (
    ConsistentMapSet,
    consistent_maps,
    Constraint,
    Instance,
    Template,
    brute_force_solve,
    check_consistent_maps,
    joint_universal_meet,
    kl_minimize,
    large_centralizer_analysis,
    largecentred_retraction,
    maroti_witness,
    quotient_instance,
    retract_instance,
    sedge_injection_check,
)
from .edges import (
    EdgeGraph,
    component_analysis,
    compute_edges,
    shift_tolerance_chain,
)
from .terms import (
    FreeAlgebra,
    term_apply,
    TermOperation,
    condition_checks,
    cyclic_operations,
    free_algebra,
    full_composition,
    local_structure,
    taylor_report,
    universal_meet,
)

__version__ = "0.1.0"
