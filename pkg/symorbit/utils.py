import copy
import os

import simplejson

from .errors import MalformedInput
from .logger import Logger
from .version import VERSION, SCHEMA_VERSION

logger = Logger("utils")

DEFAULTS_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "defaults.json")

with open(DEFAULTS_PATH, "r") as f:
    DEFAULT_CONFIG = simplejson.load(f)


def _merge(base, override):
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value

    return base


def load_config(path="config.json"):
    config = copy.deepcopy(DEFAULT_CONFIG)

    try:
        with open(path, "r") as f:
            overrides = simplejson.load(f)
    except FileNotFoundError:
        return config
    except simplejson.JSONDecodeError as e:
        logger.error(f"Ignoring {path}: {e}")
        return config

    return _merge(config, overrides)


def document_header(seed, tol):
    return {
        "v": SCHEMA_VERSION,
        "version": VERSION,
        "seed": seed,
        "tol": tol
    }


def dump_document(document):
    return simplejson.dumps(document, sort_keys=True, indent=2) + "\n"


def parse_document(text, source="<input>"):
    try:
        return simplejson.loads(text)
    except simplejson.JSONDecodeError as e:
        raise MalformedInput(f"{source}: {e.msg}", line=e.lineno, column=e.colno)


def require_field(document, field, kind=None):
    if not isinstance(document, dict) or field not in document:
        raise MalformedInput("missing required field", field=field)

    value = document[field]
    if kind is not None and not isinstance(value, kind):
        raise MalformedInput(f"expected {kind.__name__}", field=field)

    return value
