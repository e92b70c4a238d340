class StructuralError(ValueError):
    """Malformed input: unknown symbols, non-total tables, bad file syntax."""


class DomainError(ValueError):
    """Well-formed input outside an operation's domain (arity mismatch, fan-out overflow)."""
