from typing import List, Optional


class PySliceMonError(Exception):
    pass


class ConfigurationError(PySliceMonError, ValueError):
    def __init__(self, message: str, fields: Optional[List[str]] = None):
        self.fields = list(fields) if fields else []
        if self.fields:
            message = f'{message} (fields: {", ".join(self.fields)})'
        super().__init__(message)


class AbsentMetricError(PySliceMonError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else 'absent metric'


class HeaderOverflowError(PySliceMonError):
    pass


class HeaderDecodeError(PySliceMonError, ValueError):
    pass


class InsufficientDataError(PySliceMonError):
    pass


class FallbackRequired(PySliceMonError):
    """Raised by the exact solver when its budget expires without a feasible incumbent."""
