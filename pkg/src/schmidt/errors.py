"""Exception hierarchy shared by every module."""


class SchmidtError(Exception):
    pass


class RationalThetaError(SchmidtError, ValueError):
    """A quotient description that terminates, i.e. a rational theta."""


class StreamExhausted(SchmidtError):
    """A finite-depth ThetaSpec ran out of partial quotients.

    ``needed`` is the quotient index that was requested.
    """

    def __init__(self, needed: int, depth: int):
        self.needed = needed
        self.depth = depth
        super().__init__(f"partial quotient a_{needed} requested but stream depth is {depth}")


class ScanCapExceeded(SchmidtError):
    def __init__(self, needed: int, cap: int):
        self.needed = needed
        self.cap = cap
        super().__init__(f"orbit scan up to q={needed} exceeds scan cap {cap}")


class NoGapError(SchmidtError):
    """Dodge selection found no admissible gap (unreachable when the lemma's hypothesis holds)."""


class InternalContradiction(SchmidtError):
    """An inequality the White strategy relies on failed under exact arithmetic."""


class NonIsometryError(SchmidtError, ValueError):
    pass


class ForfeitError(SchmidtError):
    def __init__(self, player: str, round: int, violation):
        self.player = player
        self.round = round
        self.violation = violation
        super().__init__(f"{player} forfeits at round {round}: {violation}")


class DivergenceError(SchmidtError):
    def __init__(self, round: int, detail: str = ""):
        self.round = round
        super().__init__(f"live game diverges from recording at round {round} {detail}".rstrip())


class ConfigMismatch(SchmidtError, ValueError):
    pass
