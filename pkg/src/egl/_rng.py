"""Counter-based seed splitting shared by every Monte Carlo routine.

A stream is identified by the master seed plus a tuple of integer keys
(trial chunk, grid index, ...), so results never depend on how many
workers consumed the streams or in which order.
"""

import hashlib
import json

import numpy as np


def as_generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def stream(seed, *keys):
    """Independent generator for ``(seed, *keys)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def derive_seed(seed, *keys):
    """A plain integer seed for ``(seed, *keys)``, for handing to nested routines."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def config_digest(obj):
    """Short stable hash of a JSON-serializable configuration."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_default)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    return repr(o)
