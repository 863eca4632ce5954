"""Normative institutions over multi-robot domains.

Parse institutions, domains, groundings and trajectories; check that a
grounding is admissible; verify that a trajectory adheres to every norm;
search for admissible groundings; and plan adherent trajectories.
"""
from .admissibility import AdmissibilityReport, capable, cardinality_satisfied, executable, is_admissible
from .errors import CompileError, InadmissibleGrounding, InputError, NormativeError
from .groundsearch import GroundingQuery, enumerate_admissible, find_grounding
from .model import (
    Cardinality,
    Domain,
    Grounding,
    Institution,
    Norm,
    NormKind,
    Segment,
    Statement,
    StateVarDecl,
    StateVarName,
    Trajectory,
    derived_sets,
)
from .planner import Plan, PlanRequest, plan, plan_with_grounding
from .semantics import QualifierRegistry, QualifierSemantics, TimelineVar, Timelines, default_registry
from .specfmt import ParseError, SourceSpan, SpecFormatError
from .verifier import VerificationReport, build_network, segment_trajectory, verify

__version__ = "0.1.0"
