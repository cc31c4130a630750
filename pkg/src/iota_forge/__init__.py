"""Exact invariants of ι-complexes over F2[U].

Homology and correction terms, connected homology and ω, graded roots, and
the surgery modules of L-space knots.
"""

from .connected import (
    ConnectedReport,
    SearchCapExceeded,
    connected_complex,
    connected_homology,
    connected_report,
    filtration_member,
    infinite_order_certificate,
    maximal_self_local_equivalence,
    omega,
)
from .graded_roots import (
    GradedRoot,
    InvalidRoot,
    MonotoneRoot,
    SymmetricGradedRoot,
    hminus,
    monotone_subroot,
    parity_law,
    realize,
    root_connected_homology,
    symmetric_roots,
)
from .involutive import ParityViolation, correction_terms, involutive_cone
from .iota_complex import (
    InvalidInput,
    IotaComplex,
    NotLocal,
    d_invariant,
    dual,
    identity_complex,
    reduce,
    tensor,
    tensor_power,
    validate,
)
from .surgery import (
    Staircase,
    VSequence,
    dunder_lower_bound,
    lens_d,
    m_module,
    surgery_root,
    sum_surgeries_complex,
    sum_surgeries_connected,
    surgery_homology,
    surgery_local_rep,
    torus_staircase,
    vs_from_staircase,
)
from .ufu_algebra import GradedModule, MonomialMatrix, homology, oracle_module, truncated_homology_oracle

__version__ = "0.1.0"
