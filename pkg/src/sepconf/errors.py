"""Exception hierarchy shared across sepconf modules."""


class SepconfError(Exception):
    """Base class for all library errors."""


class ParseError(SepconfError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(SepconfError):
    pass


class CatalogMismatch(SepconfError):
    pass


class UnknownSeparator(SepconfError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__(f"unknown separator id(s): {', '.join(self.names)}")


class IllegalLevel(SepconfError):
    pass


class UnsupportedSection(ParseError):
    pass


class MissingField(SepconfError):
    pass


# llm
class EmptyCatalog(SepconfError):
    pass


class NoBlockFound(SepconfError):
    pass


class EmptyHistogram(SepconfError):
    pass


class PoolIncomplete(SepconfError):
    def __init__(self, message, pool, failures):
        super().__init__(message)
        self.pool = pool
        self.failures = failures


class ReplayMiss(SepconfError):
    pass


# ensemble
class KTooLarge(SepconfError):
    pass


class EmptyPool(SepconfError):
    pass


class MissingResults(SepconfError):
    pass


# harness
class SolverNotFound(SepconfError):
    pass


class LaunchError(SepconfError):
    pass


class LogParseError(SepconfError):
    pass


class EmptyList(SepconfError):
    pass


class NonPositiveDefaultTime(SepconfError):
    pass


class NoCommonUnsolved(SepconfError):
    pass


# baselines
class EmptyValidationSet(SepconfError):
    pass


class UnknownSeparatorInStats(SepconfError):
    pass


# textfree
class NoDescriptions(SepconfError):
    pass


# cli / store
class SchemaMismatch(SepconfError):
    pass


class MissingValidationSet(SepconfError):
    pass
