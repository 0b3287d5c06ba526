class MaternalRagError(Exception):
    """Base class for errors raised by this package."""


class InputError(MaternalRagError):
    """Malformed input file or record; ``line`` is 1-based when known."""

    def __init__(self, message, *, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class MissingArtifactError(MaternalRagError):
    pass


class ProviderError(MaternalRagError):
    """A model provider (embedder, translator, generator, ...) failed."""


class TranslationError(ProviderError):
    def __init__(self, message, original):
        super().__init__(message)
        self.original = original
