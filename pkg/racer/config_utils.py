import os
from argparse import Namespace
from collections.abc import MutableMapping

from racer.exceptions import ConfigurationError

THREADS_ENV_VAR = "RACER_THREADS"


def str2bool(v):
    if isinstance(v, bool):
        return v
    if v.lower() in ('yes', 'true', 't', 'y', '1'):
        return True
    elif v.lower() in ('no', 'false', 'f', 'n', '0'):
        return False
    else:
        raise ValueError("Boolean value expected.")


def flatten_dict(dictionary, parent_key='', separator='_'):
    items = []
    for key, value in dictionary.items():
        new_key = parent_key + separator + key if parent_key else key
        if isinstance(value, MutableMapping):
            items.extend(flatten_dict(value, new_key, separator=separator).items())
        else:
            items.append((new_key, value))
    return dict(items)


def update_nested(base, override):
    """Recursively overwrite the leaves of ``base`` with those of ``override``; returns ``base``."""
    for key, value in override.items():
        if isinstance(value, MutableMapping) and isinstance(base.get(key), MutableMapping):
            update_nested(base[key], value)
        else:
            base[key] = value
    return base


def update_config_from_args(config, args):
    """Copy the grouped namespaces produced by GroupedArgParser into the nested config dict."""
    for group_name in vars(args):
        group = getattr(args, group_name)
        if not isinstance(group, Namespace):
            config[group_name] = group
            continue
        if group_name not in config:
            config[group_name] = {}
        for k, v in vars(group).items():
            if isinstance(v, Namespace):
                config[group_name].setdefault(k, {})
                # one level of nesting, e.g. synth.partial
                config[group_name][k].update(vars(v))
            else:
                config[group_name][k] = v
    return config


def resolve_threads(threads=None):
    """Thread count from the command line, else RACER_THREADS, else 1."""
    if threads is None:
        threads = os.environ.get(THREADS_ENV_VAR, 1)
    try:
        threads = int(threads)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV_VAR} must be an integer, got {threads!r}")
    if threads < 1:
        raise ConfigurationError(f"--threads must be at least 1, got {threads}")
    return threads
