"""Exception hierarchy shared by every module of the package."""


class MltmfError(Exception):
    """Base class for all errors raised by mltmf."""

    reason_code = "ERROR"


# -- syntax -------------------------------------------------------------------


class FormulaSyntaxError(MltmfError, ValueError):
    reason_code = "SYNTAX"

    def __init__(self, message, position=None, expected=()):
        self.position = position
        self.expected = tuple(expected)
        if position is not None:
            message = f"{message} at position {position}"
        if self.expected:
            message += f" (expected {', '.join(self.expected)})"
        super().__init__(message)


class SignatureError(MltmfError, ValueError):
    reason_code = "SIGNATURE"


class UnknownSymbolError(MltmfError, ValueError):
    reason_code = "UNKNOWN_SYMBOL"

    def __init__(self, symbol, message=None):
        self.symbol = symbol
        super().__init__(message or f"unknown symbol {symbol!r}")


class ArityMismatchError(MltmfError, ValueError):
    reason_code = "ARITY"

    def __init__(self, symbol, expected, got, path=""):
        self.symbol = symbol
        self.expected = expected
        self.got = got
        self.path = path
        super().__init__(
            f"{symbol!r} expects {expected} argument(s), got {got} at {path or '<root>'}"
        )


class SelfApplicationError(MltmfError, ValueError):
    reason_code = "SELF_APPLICATION"

    def __init__(self, symbol, path="", inner_path=""):
        self.symbol = symbol
        self.path = path
        self.inner_path = inner_path
        super().__init__(
            f"symbol {symbol!r} is applied to itself: {path or '<root>'} contains it at {inner_path}"
        )


class InvalidFormulaError(MltmfError, ValueError):
    reason_code = "INVALID_FORMULA"


# -- semantics ------------------------------------------------------------------


class BudgetExceeded(MltmfError):
    reason_code = "BUDGET"

    def __init__(self, what, count, limit=None):
        self.what = what
        self.count = count
        self.limit = limit
        msg = f"{what}: {count}"
        if limit is not None:
            msg += f" exceeds limit {limit}"
        super().__init__(msg)


class MissingTableError(MltmfError, KeyError):
    reason_code = "MISSING_TABLE"

    def __str__(self):
        return str(self.args[0]) if self.args else "missing table"


class FreeVariableError(MltmfError, ValueError):
    reason_code = "FREE_VARIABLE"


# -- information algebra --------------------------------------------------------


class MappingError(MltmfError, ValueError):
    reason_code = "MAPPING"


class NotTotal(MappingError):
    reason_code = "NOT_TOTAL"


class NotSurjective(MappingError):
    reason_code = "NOT_SURJECTIVE"


class MultivaluedMapping(MappingError):
    reason_code = "MULTIVALUED"


class NoiseError(MltmfError, ValueError):
    reason_code = "NOISE"


class LossNotSubset(NoiseError):
    reason_code = "LOSS_NOT_SUBSET"


class SuperposedOverlaps(NoiseError):
    reason_code = "SUPERPOSED_OVERLAPS"


class ResultInconsistent(MltmfError, ValueError):
    reason_code = "RESULT_INCONSISTENT"


class RealizationMismatch(MltmfError, ValueError):
    reason_code = "REALIZATION_MISMATCH"


class ComponentMismatch(MltmfError, ValueError):
    reason_code = "COMPONENT_MISMATCH"


class SignatureMismatch(MltmfError, ValueError):
    reason_code = "SIGNATURE_MISMATCH"


# -- automata ---------------------------------------------------------------------


class AutomatonError(MltmfError, ValueError):
    reason_code = "AUTOMATON"


class WordTooLong(AutomatonError):
    reason_code = "WORD_TOO_LONG"


class UnknownAutomatonSymbol(AutomatonError):
    reason_code = "UNKNOWN_SYMBOL"


# -- learning ---------------------------------------------------------------------


class NotLearnable(MltmfError, ValueError):
    reason_code = "NOT_LEARNABLE"


class NotProcessable(MltmfError, ValueError):
    reason_code = "NOT_PROCESSABLE"


# -- ethics -----------------------------------------------------------------------


class ConstraintError(MltmfError, ValueError):
    reason_code = "CONSTRAINT"


class TooLargeForExact(MltmfError, ValueError):
    reason_code = "TOO_LARGE_FOR_EXACT"


# -- generalization bound ------------------------------------------------------


class DistributionError(MltmfError, ValueError):
    reason_code = "DISTRIBUTION"


class SupportMismatch(DistributionError):
    reason_code = "SUPPORT_MISMATCH"


class InfiniteDivergence(DistributionError):
    reason_code = "INFINITE_DIVERGENCE"
