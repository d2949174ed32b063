"""Forward-simulation relations, goals, and decomposition rules."""

from .goals import GOAL_KINDS, SimulationGoal, derive_succ_fail, eval_state_of
from .qpred import (
    Q_EXH,
    Q_INH,
    QCache,
    QRef,
    check_q_propagation,
    inversion_holds,
    q_holds,
)
from .relation import (
    SR,
    FieldEnc,
    FstProj,
    RelationSpec,
    SndProj,
    StatePair,
    StateSpace,
    ValueIs,
    encode_state,
    enumerate_tau,
    eval_relation,
    pair_constraints_ok,
    project_state,
    tracked_names,
)
from .rules import (
    RULE_NAMES,
    CompDecomp,
    ConsAdd,
    QProp,
    RuleApp,
    RuleEnv,
    RuleError,
    SpecDep,
    apply_rule,
)

__all__ = [
    "GOAL_KINDS", "SimulationGoal", "derive_succ_fail", "eval_state_of",
    "Q_EXH", "Q_INH", "QCache", "QRef", "check_q_propagation",
    "inversion_holds", "q_holds",
    "SR", "FieldEnc", "FstProj", "RelationSpec", "SndProj", "StatePair",
    "StateSpace", "ValueIs", "encode_state", "enumerate_tau", "eval_relation",
    "pair_constraints_ok", "project_state", "tracked_names",
    "RULE_NAMES", "CompDecomp", "ConsAdd", "QProp", "RuleApp", "RuleEnv",
    "RuleError", "SpecDep", "apply_rule",
]
