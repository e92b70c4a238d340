"""Learning MCFGs through typed refinement by a finite monoid."""

from .errors import DomainError, StructuralError

__all__ = ["DomainError", "StructuralError"]
