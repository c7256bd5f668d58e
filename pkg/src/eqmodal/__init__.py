"""Decision procedures for the first-order modal logic of equality over the
Kripke categories of sets, plus a finite modal-frame engine and a harness
that reproduces the classification table at desk scale."""

from .eqcard import (
    OMEGA,
    AbstractState,
    CategoryKind,
    EqCardTable,
    Morphisms,
    Regime,
    can_step,
    category,
    eliminate,
    evaluate,
    successors,
    threshold,
    to_normal_formula,
)
from .formula import (
    erase_modalities,
    expand_sigma,
    parse,
    print_formula,
)
from .partition import SetPartition, enumerate_partitions, kernel_partition, refines

__all__ = [
    "OMEGA",
    "AbstractState",
    "CategoryKind",
    "EqCardTable",
    "Morphisms",
    "Regime",
    "SetPartition",
    "can_step",
    "category",
    "eliminate",
    "enumerate_partitions",
    "erase_modalities",
    "evaluate",
    "expand_sigma",
    "kernel_partition",
    "parse",
    "print_formula",
    "refines",
    "successors",
    "threshold",
    "to_normal_formula",
]
