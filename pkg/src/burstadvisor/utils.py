import hashlib
import json
import os
from typing import Any, Iterable, List, Tuple


def data_path():
    """
    Get the path to the data directory
    """
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


def parse_node_sizes(spec) -> Tuple[int, ...]:
    """
    Parse a processors-per-node set.

    Accepts a sequence of integers, a comma separated string ("1,2,4,8,12,16"),
    a range string ("1-200") or a mix of both ("1-4,8,16").
    """
    if isinstance(spec, str):
        sizes: List[int] = []
        for part in spec.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part:
                low, high = part.split("-", 1)
                sizes.extend(range(int(low), int(high) + 1))
            else:
                sizes.append(int(part))
    elif isinstance(spec, Iterable):
        sizes = [int(s) for s in spec]
    else:
        raise ValueError(f"Unsupported node size specification: {spec!r}")
    return tuple(sorted(set(sizes)))


def fingerprint(payload: Any) -> str:
    """Deterministic sha256 over the canonical JSON form of ``payload``."""
    key_str = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(key_str.encode()).hexdigest()
