"""Bell-CHSH experiments with uniformly mixed sequential measurements.

Alice's and Bob's observables need not commute; each joint measurement is
run as two consecutive measurements in a random, uniformly mixed order.
"""
__version__ = "0.1.0"

from .chsh import (
    BellScenario,
    BoundClass,
    CHSHReport,
    NormDecomposition,
    chsh_operator,
    chsh_value,
    classify_bound,
    correlation,
    max_chsh_over_states,
    norm_decomposition,
    symmetrized_product,
)
from .observables import (
    DichotomicObservable,
    Signature,
    from_matrix,
    from_spin_direction,
    identity_observable,
    lift,
    pauli,
    random_dichotomic,
)
from .sequential import (
    JointDistribution,
    QuantumState,
    born_probability,
    collapse,
    marginal_deviation,
    marginal_laws_report,
    mixed_joint_distribution,
    sequential_probability,
    singlet_state,
)
