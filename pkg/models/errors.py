# ================================
# ERRORS
# ================================
# Everything derives from BeablesError, itself a ValueError.

from typing import Iterable, Optional


class BeablesError(ValueError):
    """Base class for every library error"""


class UnknownVariableError(BeablesError):
    def __init__(self, name: str, known: Iterable[str] = ()):
        known = list(known)
        hint = f" (known: {', '.join(known)})" if known else ""
        super().__init__(f"Unknown variable '{name}'{hint}")
        self.name = name


class OverlappingVariablesError(BeablesError):
    def __init__(self, names: Iterable[str]):
        names = sorted(set(names))
        super().__init__(f"Variable subsets overlap on: {', '.join(names)}")
        self.names = names


class SpaceMismatchError(BeablesError):
    pass


class InvalidDistributionError(BeablesError):
    pass


class ContextualityError(BeablesError):
    """A setting triple outside the model's allowed contexts was requested"""

    def __init__(self, triple, message: Optional[str] = None):
        super().__init__(message or f"Setting triple {tuple(triple)} is not an allowed context")
        self.triple = tuple(triple)


class MissingEntryError(BeablesError):
    pass


class InsufficientSettingsError(BeablesError):
    pass


class SettingsPriorError(BeablesError):
    pass


class EnumerationCapError(BeablesError):
    def __init__(self, count: int, cap: int):
        super().__init__(
            f"Deterministic strategy count {count:,} exceeds the enumeration cap {cap:,}; "
            "use coordinate ascent (--ascend) or raise the cap"
        )
        self.count = count
        self.cap = cap


class ScenarioSizeError(BeablesError):
    pass


class ModelFileError(BeablesError):
    """Malformed model, observed-joint or table document"""

    def __init__(self, message: str, field_path: str = ""):
        super().__init__(f"{field_path}: {message}" if field_path else message)
        self.field_path = field_path
