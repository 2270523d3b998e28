"""Exception types shared across the toolkit."""

from __future__ import annotations


class BanEvasionError(Exception):
    """Base class for all toolkit errors."""


# corpus ---------------------------------------------------------------


class RecordParseError(BanEvasionError):
    def __init__(self, path: str, line_number: int, reason: str):
        self.path = path
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{path}:{line_number}: {reason}")


class ReferentialIntegrityError(BanEvasionError):
    def __init__(self, offending_id: str, context: str = ""):
        self.offending_id = offending_id
        msg = f"unknown account id {offending_id!r}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class DuplicateIdError(BanEvasionError):
    def __init__(self, account_id: str):
        self.account_id = account_id
        super().__init__(f"duplicate account id {account_id!r}")


class InvalidConfigError(BanEvasionError):
    def __init__(self, field: str, reason: str = ""):
        self.field = field
        msg = f"invalid config field {field!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


# pairing --------------------------------------------------------------


class AccountNotInGroupError(BanEvasionError):
    pass


class AccountNeverBannedError(BanEvasionError):
    pass


# matching -------------------------------------------------------------


class MissingBanTimeError(BanEvasionError):
    def __init__(self, account_id: str):
        self.account_id = account_id
        super().__init__(f"account {account_id!r} has no ban time")


class InvalidCapError(BanEvasionError):
    pass


class TrueParentMissingError(BanEvasionError):
    def __init__(self, child_id: str):
        self.child_id = child_id
        super().__init__(f"no eligible true parent for child {child_id!r}")


# textstats ------------------------------------------------------------


class CategoryMismatchError(BanEvasionError):
    pass


class EmptyInputError(BanEvasionError):
    pass


class DimensionMismatchError(BanEvasionError):
    pass


class LexiconParseError(BanEvasionError):
    def __init__(self, path: str, line_number: int, reason: str):
        self.path = path
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{path}:{line_number}: {reason}")


# features -------------------------------------------------------------


class UnsortedRevisionsError(BanEvasionError):
    pass


class MissingParentBanError(BanEvasionError):
    pass


# model ----------------------------------------------------------------


class SingleClassInputError(BanEvasionError):
    pass


class NonFiniteFeatureError(BanEvasionError):
    pass


class FeatureNameMismatchError(BanEvasionError):
    pass


# analysis -------------------------------------------------------------


class InsufficientSamplesError(BanEvasionError):
    pass


class ZeroVarianceError(BanEvasionError):
    pass


class LengthMismatchError(BanEvasionError):
    pass


# cli ------------------------------------------------------------------


class PipelineError(BanEvasionError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
