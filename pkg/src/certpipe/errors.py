"""Exception hierarchy shared across the pipeline stages."""


class CertpipeError(Exception):
    """Base class for all errors raised by this package."""


# --- scan naming / inventory ---------------------------------------------

class MalformedName(CertpipeError):
    pass


class YearOutOfRange(CertpipeError):
    pass


class NumberZero(CertpipeError):
    pass


class UnreadableDirectory(CertpipeError):
    pass


class FilesystemError(CertpipeError):
    """A clean(apply) action failed; the action log written so far is valid."""

    def __init__(self, message: str, log_path=None):
        super().__init__(message)
        self.log_path = log_path


# --- document ingestion ----------------------------------------------------

class ParseError(CertpipeError):
    """Document could not be parsed; carries the path of the failing element."""

    def __init__(self, message: str, element_path: str = ""):
        super().__init__(f"{element_path}: {message}" if element_path else message)
        self.element_path = element_path


class DegeneratePolygon(CertpipeError):
    pass


class NoRegions(CertpipeError):
    pass


# --- lexicon / names --------------------------------------------------------

class EmptyLexicon(CertpipeError):
    pass


class NoEligibleEntry(CertpipeError):
    pass


class EmptyName(CertpipeError):
    pass


# --- linking / evaluation ---------------------------------------------------

class NegativeAge(CertpipeError):
    pass


class EmptyFile(CertpipeError):
    pass


class EmptyReference(CertpipeError):
    pass


class NoPairs(CertpipeError):
    pass


# --- pipeline / review ------------------------------------------------------

class ConfigError(CertpipeError):
    pass


class OrphanEvent(CertpipeError):
    """A review event refers to an item id with no matching record."""


class UnknownItem(CertpipeError):
    pass


class ItemNotPending(CertpipeError):
    pass


class InvalidCorrection(CertpipeError):
    pass
