"""Exception hierarchy. Every error carries the CLI exit code it maps to."""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FETCH = 10
EXIT_STORE = 11
EXIT_MODEL = 12
EXIT_DATA = 13


class PhishvisError(Exception):
    exit_code = 1


class UsageError(PhishvisError):
    exit_code = EXIT_USAGE


class OutOfRange(UsageError, ValueError):
    pass


class InvalidUrl(UsageError, ValueError):
    pass


class UnsupportedScheme(InvalidUrl):
    pass


class FetchError(PhishvisError):
    exit_code = EXIT_FETCH


class NameResolution(FetchError):
    pass


class Timeout(FetchError):
    pass


class HttpStatus(FetchError):
    def __init__(self, code, url=""):
        super().__init__(f"HTTP {code} for {url}" if url else f"HTTP {code}")
        self.code = code
        self.url = url


class BodyTooLarge(FetchError):
    pass


class TooManyRedirects(FetchError):
    pass


class ConnectionFailed(FetchError):
    pass


class EmptyContent(FetchError, ValueError):
    """Raised when there are no bytes to visualize (usually a failed fetch)."""


class StoreError(PhishvisError):
    exit_code = EXIT_STORE


class StoreCorrupt(StoreError):
    pass


class StoreWriteFailed(StoreError):
    pass


class ManifestParse(StoreError):
    def __init__(self, line_no, reason=""):
        super().__init__(f"manifest line {line_no}: {reason}".rstrip(": "))
        self.line_no = line_no


class ModelError(PhishvisError):
    exit_code = EXIT_MODEL


class BadShape(ModelError, ValueError):
    pass


class ModelFormat(ModelError):
    pass


class DataError(PhishvisError):
    exit_code = EXIT_DATA


class DegenerateDataset(DataError, ValueError):
    pass


class Undefined(DataError, ArithmeticError):
    """A metric whose denominator is zero."""
