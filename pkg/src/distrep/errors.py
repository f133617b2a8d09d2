"""Exception hierarchy shared by every module.

All errors derive from :class:`DistrepError` (itself a ``ValueError``) so that
callers can catch data problems in one place; the CLI maps them to exit code 1.
"""

from __future__ import annotations


class DistrepError(ValueError):
    """Base class for data errors raised by distrep."""


# ingest
class EmptyInput(DistrepError):
    pass


class MalformedHeader(DistrepError):
    pass


class UnparseableRow(DistrepError):
    """One or more CSV rows could not be parsed.

    ``problems`` holds ``(line_number, message)`` pairs for every rejected row.
    """

    def __init__(self, problems: list[tuple[int, str]]):
        self.problems = list(problems)
        shown = "; ".join(f"line {ln}: {msg}" for ln, msg in self.problems[:10])
        more = f" (+{len(self.problems) - 10} more)" if len(self.problems) > 10 else ""
        super().__init__(f"{len(self.problems)} unparseable row(s): {shown}{more}")


class AllDataDiscarded(DistrepError):
    pass


# densities
class DegenerateSample(DistrepError):
    pass


class GridTooCoarse(DistrepError):
    pass


# wasserstein
class GridMismatch(DistrepError):
    pass


class EmptySample(DistrepError):
    pass


# regression
class AllWeightsVanish(DistrepError):
    pass


class ZeroResponseVariance(DistrepError):
    pass


class SingularCovariance(DistrepError):
    pass


class ZeroFrechetVariance(DistrepError):
    pass


# inference
class DegenerateGroupVariance(DistrepError):
    pass


# clustering
class EmptyCluster(DistrepError):
    pass


# baseline
class EmptySeries(DistrepError):
    pass


class NonpositivePart(DistrepError):
    pass


class DimensionMismatch(DistrepError):
    pass


class EmptyMask(DistrepError):
    pass
