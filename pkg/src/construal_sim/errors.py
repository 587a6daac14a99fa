"""Exception hierarchy.

Every domain error carries an ``exit_code`` so the CLI can map it without a
lookup table: 2 for domain/validation problems, 1 for I/O.
"""


class ConstrualSimError(Exception):
    exit_code = 2


class MalformedWorld(ConstrualSimError):
    pass


class InvalidWorld(ConstrualSimError):
    def __init__(self, rule: str, detail: str = ""):
        self.rule = rule
        msg = rule if not detail else f"{rule}: {detail}"
        super().__init__(msg)


class Unreachable(ConstrualSimError):
    pass


class CapExceeded(ConstrualSimError):
    pass


class BrokenSearchResult(ConstrualSimError):
    pass


class ReplanCapExceeded(ConstrualSimError):
    pass


class DegenerateNormal(ConstrualSimError):
    pass


class AllRolloutsTimedOut(ConstrualSimError):
    pass


class TooManyObjects(ConstrualSimError):
    pass


class NonFiniteScore(ConstrualSimError):
    pass


class EmptyDistribution(ConstrualSimError):
    pass


class LengthMismatch(ConstrualSimError):
    pass


class NotNormalized(ConstrualSimError):
    pass


class DegenerateInput(ConstrualSimError):
    pass


class NoOverlap(ConstrualSimError):
    pass


class GenerationExhausted(ConstrualSimError):
    pass


class ParamFileError(ConstrualSimError):
    pass


class DataFileError(ConstrualSimError):
    pass
