"""Exception hierarchy shared across the engine."""


class AgentSightError(Exception):
    """Base class for all engine errors."""


class TaxonomyError(AgentSightError):
    """Malformed or inconsistent taxonomy document."""


class MethodNotAvailableError(TaxonomyError):
    """Requested a temporality cell marked N/A in the taxonomy."""

    def __init__(self, message: str, na_reason: str):
        super().__init__(message)
        self.na_reason = na_reason


class IngestError(AgentSightError):
    """Fatal problem while ingesting input files."""


class StaleSnapshotError(AgentSightError):
    """Subset references a snapshot that is not registered."""


class QuerySyntaxError(AgentSightError):
    """DSL text failed to parse."""

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        super().__init__(message)
        self.line = line
        self.column = column
        self.expected = expected

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        return f"{self.args[0]} at line {self.line}, column {self.column}{exp}"


class QueryValidationError(AgentSightError):
    """Chain is syntactically fine but statically invalid."""

    def __init__(self, message: str, step_index: int):
        super().__init__(message)
        self.step_index = step_index


class QueryExecutionError(AgentSightError):
    """A step failed at execution time."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class AssemblyError(AgentSightError):
    """Subset cannot be assembled for the requested mining method."""


class MiningError(AgentSightError):
    """Miner rejected its inputs or parameters."""


class VisualizationError(AgentSightError):
    """No compatible visualization or invalid spec."""


class ReportError(AgentSightError):
    """Report composition failed."""


class GatewayError(AgentSightError):
    """Base for LLM gateway failures."""


class SchemaValidationError(GatewayError):
    """Backend response does not match the action schema."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class TransportError(GatewayError):
    """Backend unreachable, timed out, or returned garbage transport-level data."""


class GatewayExhaustedError(GatewayError):
    """All attempts (1 + max_retries) failed."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


class PlannerError(AgentSightError):
    """Illegal tree mutation or unknown node."""


class TerminatedNodeError(PlannerError):
    """Mutation attempted on a Terminated or Pruned node."""


class ConfigError(AgentSightError):
    """Engine configuration violates a constraint."""
