import os
import hashlib
import logging

import numpy as np

import config

logger = logging.getLogger(__name__)

# stage tags of the per-trial random streams; solver streams follow,
# one per entry of config.METHODS, so adding a method never moves the others
STAGES = {
    "channel": 0,
    "blockage": 1,
    "precoder": 2,
    "combiner": 3,
    "noise": 4,
}


def stage_code(stage):
    if stage in STAGES:
        return STAGES[stage]
    if stage.startswith("solver:"):
        method = stage.split(":", 1)[1]
        return len(STAGES) + config.METHODS.index(method)
    raise KeyError("unknown random stage {}".format(stage))


def derive_rng(master_seed, trial_index, stage):
    """
    Independent generator for (master_seed, trial_index, stage). SeedSequence
    hashes the triple into a 128-bit entropy pool.
    """
    seq = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=(int(trial_index), stage_code(stage))
    )
    return np.random.default_rng(seq)


def resolve_master_seed(seed=None, default=None):
    """Flag > environment variable > config value > config.MASTER_SEED."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(config.SEED_ENV_VAR)
    if env:
        return int(env)
    if default is not None:
        return int(default)
    return config.MASTER_SEED


def to_pairs(a):
    """Complex array -> nested lists of [re, im] pairs."""
    a = np.asarray(a, dtype=np.complex128)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def from_pairs(pairs, name="array"):
    a = np.asarray(pairs, dtype=float)
    if a.ndim == 0 or a.shape[-1] != 2:
        raise ValueError("{} must hold [re, im] pairs".format(name))
    return a[..., 0] + 1j * a[..., 1]


def format_param(x):
    return format(float(x), ".{}g".format(config.PARAM_DIGITS))


def data_digest(*arrays):
    digest = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        digest.update(str(a.shape).encode())
        digest.update(a.tobytes())
    return digest.hexdigest()


def create_dir(path):
    if path and not os.path.isdir(path):
        os.makedirs(path)
    return path
