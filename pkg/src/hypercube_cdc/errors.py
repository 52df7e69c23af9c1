"""Exception hierarchy shared by every stage of the pipeline."""


class HypercubeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(HypercubeError, ValueError):
    """A parameter tuple violates a construction constraint."""


class MissingIVError(HypercubeError):
    """A shuffle operand was never produced by the Map phase."""

    def __init__(self, node: int, key: tuple[int, int]):
        super().__init__(f"node {node} never computed intermediate value v[{key[0]},{key[1]}]")
        self.node = node
        self.key = key


class DecodeMismatchError(HypercubeError):
    """A decoded payload differs from the reference map output."""


class DuplicateDeliveryError(HypercubeError):
    """The same intermediate value reached the same node twice."""


class SingularMatrixError(HypercubeError, ArithmeticError):
    """Gaussian elimination found no pivot in some column."""


class IncompleteInputsError(HypercubeError):
    def __init__(self, func: int, missing: list[int]):
        head = ", ".join(map(str, missing[:8]))
        more = "" if len(missing) <= 8 else f", ... ({len(missing)} total)"
        super().__init__(f"function {func} is missing intermediate values for files [{head}{more}]")
        self.func = func
        self.missing = missing
