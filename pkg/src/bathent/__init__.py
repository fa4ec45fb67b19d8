"""Entanglement generation by Kossakowski-Lindblad dynamics of two d-level systems.

The :mod:`~bathent.witness` module decides from the generator alone whether a
product state becomes entangled at short times; :mod:`~bathent.dynamics`
checks the verdicts by evolving the state and monitoring the partial
transpose.
"""
from .basis import BasisSet, basis_from_name, gellmann_basis, pauli_basis, tensor_pauli_basis
from .dynamics import (
    NegativityCurve,
    NoneFound,
    Onset,
    ToleranceBreach,
    entanglement_onset,
    evolve,
    negativity,
    negativity_curve,
    partial_transpose,
)
from .generator import (
    GeneratorModel,
    HamiltonianSpec,
    KossakowskiBlocks,
    Superoperator,
    apply,
    build_superoperator,
    partial_transpose_conjugate,
    validate_cp,
)
from .modelfile import ModelFileError, load_model, parse_model
from .models import (
    collective_four_qubit_model,
    pair_reduction_model,
    symmetric_dissipation_model,
)
from .search import capability, find_entangling_state, sample_product_state
from .witness import (
    ProductState,
    assess,
    basis_state,
    complement_basis,
    expansion_coefficient,
    first_order_verdict,
    flip_vectors,
    principal_minors,
    product_state,
    resolve_marginal,
    witness_matrix,
)

__version__ = "0.1.0"
