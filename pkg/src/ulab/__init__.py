"""Desk-scale ultrapower laboratory.

Finite-support set algebra over small index spaces, Fubini products of
ultrafilter arrays, ultrapowers of finite structures with a transfer
checker, a decidable germ field with infinitesimals, and superstructure
levels, all exhaustively verifiable on small instances.
"""

from .filters import (
    OMEGA,
    ArrayEntry,
    ArraySpec,
    Classification,
    EmptyArray,
    EmptyIntersection,
    FactorialTowerOracle,
    FilterBase,
    FiniteDomain,
    NotABase,
    OmegaDomain,
    PrincipalOracle,
    Verdict,
    build_definable_array,
    classify,
    ft_membership,
    make_array,
    subset_lex_lt,
    uob,
)
from .germs import (
    Comparison,
    DivisionByZeroGerm,
    Germ,
    GermClass,
    InfiniteGerm,
    parse_germ,
)
from .index_algebra import (
    ArrayMismatch,
    CoordConstraint,
    CoordProjection,
    MissingCoordinate,
    SupportedFunction,
    SupportedSet,
    UnrepresentableSet,
    agreement_set,
    bool_op,
    broken_complement_fubini,
    combine,
    constraint_set,
    contains,
    empty_set,
    equal_mod_D,
    from_dnf,
    fubini_member,
    full_set,
    normalize,
)
from .logic import (
    FormulaSyntaxError,
    TransferReport,
    UnknownRelation,
    enumerate_formulas,
    enumerate_sentences,
    eval_base,
    eval_star,
    eval_star_principal,
    node_count,
    parse,
    quantifier_depth,
    render,
    transfer_check,
    truth_set,
)
from .periodic import PeriodicSet
from .superstructure import (
    LevelTooLarge,
    StarVElement,
    VAtom,
    VSet,
    bounded_transfer_check,
    build_V,
    build_levels,
    eval_star_v,
    eval_v,
    identify_as_subset,
    star_membership,
    star_of,
)
from .ultrapower import (
    ArityMismatch,
    HyperElement,
    NotAllPrincipal,
    NotFree,
    Relation,
    Structure,
    UltrapowerModel,
    UnknownElement,
    enumerate_functions,
    principal_collapse,
    properness_witness,
    relation_lift,
    star_embed,
)

__version__ = "0.1.0"
