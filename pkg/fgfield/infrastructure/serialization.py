"""Serialization utilities for JSON encoding/decoding."""

import dataclasses
import json
from datetime import datetime
from enum import Enum
from fractions import Fraction
from pathlib import Path

import numpy as np


class CustomJSONEncoder(json.JSONEncoder):
    """JSON encoder for numpy values, fractions, enums, dataclasses and paths."""

    def default(self, obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, Fraction):
            return str(obj)
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, Path):
            return str(obj)
        if isinstance(obj, datetime):
            return obj.isoformat()
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            if hasattr(obj, "to_dict"):
                return obj.to_dict()
            return dataclasses.asdict(obj)
        if hasattr(obj, "model_dump"):
            return obj.model_dump(mode="json")
        return super().default(obj)


def json_dumps(obj, **kwargs):
    """Wrapper around json.dumps that uses our custom encoder."""
    kwargs.setdefault("sort_keys", True)
    return json.dumps(obj, cls=CustomJSONEncoder, **kwargs)


def json_loads(s, **kwargs):
    """Wrapper around json.loads."""
    return json.loads(s, **kwargs)
