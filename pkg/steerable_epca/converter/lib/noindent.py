import json
import re

import numpy as np


class NoIndent(object):
    """Value wrapper."""

    def __init__(self, value):
        if isinstance(value, np.ndarray):
            value = value.tolist()
        if not isinstance(value, (list, tuple)):
            raise TypeError("Only lists, tuples and arrays can be wrapped")
        self.value = value


def to_builtin(obj):
    """Plain Python value for numpy scalars and arrays."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


class CustomEncoder(json.JSONEncoder):
    FORMAT_SPEC = "@@{}@@"
    regex = re.compile(FORMAT_SPEC.format(r"(\d+)"))

    def __init__(self, **kwargs):
        # Keyword arguments to ignore when encoding NoIndent wrapped values.
        ignore = {"cls", "indent", "default"}

        # Save copy of any keyword argument values needed for use here.
        self._kwargs = {k: v for k, v in kwargs.items() if k not in ignore}
        self._wrapped = {}
        super(CustomEncoder, self).__init__(**kwargs)

    def default(self, obj):
        if isinstance(obj, NoIndent):
            self._wrapped[id(obj)] = obj
            return self.FORMAT_SPEC.format(id(obj))
        try:
            return to_builtin(obj)
        except TypeError:
            return super(CustomEncoder, self).default(obj)

    def iterencode(self, obj, **kwargs):
        format_spec = self.FORMAT_SPEC  # Local var to expedite access.

        # Replace any marked-up NoIndent wrapped values in the JSON repr
        # with the json.dumps() of the corresponding wrapped Python object.
        for encoded in super(CustomEncoder, self).iterencode(obj, **kwargs):
            for match in self.regex.finditer(encoded):
                id = int(match.group(1))
                no_indent = self._wrapped.pop(id)
                json_repr = json.dumps(
                    no_indent.value, default=to_builtin, **self._kwargs
                )
                encoded = encoded.replace(
                    '"{}"'.format(format_spec.format(id)), json_repr
                )

            yield encoded
