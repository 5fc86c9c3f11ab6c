"""Exception hierarchy shared across the package."""


class ConvrecError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ConvrecError):
    """Caller passed a value that violates an operation's precondition."""


class StateError(ConvrecError):
    """An operation was applied to a session in the wrong state."""


class ContractError(ConvrecError):
    """An internal call violated a module contract (a harness bug, not user input)."""


class TemplateError(ConvrecError):
    """Prompt template rendering failed (missing/extra placeholder, unknown id)."""


class TransportError(ConvrecError):
    """A remote completion failed after the retry budget was exhausted."""


class ScriptGapError(ConvrecError):
    """A scripted backend had no entry for the requested key (fixture bug)."""


class ReplayMissError(ConvrecError):
    """A replay cache had no entry for the prompt and fallthrough is disabled."""


class AgentFailureError(ConvrecError):
    """An agent produced no usable output after its retry allowance."""


class MalformedOutputError(ConvrecError):
    """Generated text did not satisfy the tagged-output contract after reprompting."""


class ProfileBuildError(ConvrecError):
    """A target-item keyword profile could not be built."""


class DataError(ConvrecError):
    """Dataset ingestion or sample construction failed."""


class MetricError(ConvrecError):
    """A metric is undefined for the given record set."""
