"""Exception types raised across the package."""


class DampedWaveError(Exception):
    """Base class for every error raised by dampedwave."""


class InvalidArg(DampedWaveError, ValueError):
    pass


class DivergentIntegral(DampedWaveError):
    """The Dini integral was requested for a non-Dini modulus."""


class NoBracket(DampedWaveError):
    """Psi stays below the target on the whole search range."""


class SizeMismatch(DampedWaveError, ValueError):
    pass


class NonFiniteState(DampedWaveError, FloatingPointError):
    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"non-finite state after t={t:g}")


class NotConverged(DampedWaveError):
    pass


class InsufficientData(DampedWaveError):
    pass


class NoBlowupWithinHorizon(DampedWaveError):
    def __init__(self, horizon):
        self.horizon = horizon
        super().__init__(f"no blow-up detected up to t={horizon:g}")


class IncompleteSweep(DampedWaveError):
    def __init__(self, eps_values):
        self.eps_values = list(eps_values)
        super().__init__(
            "no blow-up within horizon for eps = "
            + ", ".join(f"{e:g}" for e in self.eps_values))


class TrajectoryTooShort(DampedWaveError):
    pass


class ConfigError(DampedWaveError):
    pass


class MissingKey(ConfigError, KeyError):
    def __init__(self, key):
        self.key = key
        super().__init__(key)

    def __str__(self):
        return f"MissingKey({self.key!r})"


class BadValue(ConfigError, ValueError):
    def __init__(self, key, reason):
        self.key = key
        self.reason = reason
        super().__init__(f"BadValue({key!r}): {reason}")


class UnknownFamily(ConfigError, ValueError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"UnknownFamily({name!r})")
