"""Exception hierarchy shared across the package."""
from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .admissibility import AdmissibilityReport


class NormativeError(Exception):
    """Base class for errors raised by this package."""


class InputError(NormativeError, ValueError):
    """Inputs reference unknown identifiers or are otherwise malformed."""


class CompileError(NormativeError):
    """A norm cannot be given semantics in the domain at hand."""


class InadmissibleGrounding(NormativeError):
    """Raised where an admissible grounding is a precondition."""

    def __init__(self, report: AdmissibilityReport):
        super().__init__("grounding is not admissible: " + "; ".join(report.lines()))
        self.report = report
