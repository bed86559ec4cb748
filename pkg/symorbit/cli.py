import csv
import io
import sys

import numpy as np
import simplejson

from .chebyshev import cheb_table
from .darwin import ReturnMapBlocks, require_darwin
from .errors import ConfigError, MalformedInput, SymorbitError, input_errors
from .hormander import Method, index_sequence
from .linalg_core import norm_inf
from .logger import Logger
from .orbit_pipeline import (
    build_transverse_section,
    find_symmetric_orbit,
    reduced_monodromy,
    system_from_spec
)
from .utils import DEFAULT_CONFIG, document_header, dump_document, parse_document
from .verify import verify
from .version import SCHEMA_VERSION, VERSION

logger = Logger("cli")

SUBCOMMANDS = ("index", "verify", "cheb", "orbit")

METHOD_CHOICES = {
    "formula": (Method.FORMULA,),
    "qform": (Method.QUADRATIC_FORM,),
    "paths": (Method.PATH_DIFFERENCE,),
    "both": (Method.FORMULA, Method.QUADRATIC_FORM),
    "all": (Method.FORMULA, Method.QUADRATIC_FORM, Method.PATH_DIFFERENCE)
}

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DISAGREEMENT = 2


class RunConfig:
    """
    :param options: subcommand flags (``input``, ``method``, ``n``, ``trials``,
        ``methods``, ``degrees``, ``points``, ``system``, ``seed_point``, ...)
    :param settings: the merged config.json document
    """

    def __init__(self, subcommand, tol, seed, k_max, output_path=None, options=None, settings=None):
        if subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand '{subcommand}'")
        if not tol > 0:
            raise ConfigError(f"tol must be positive, got {tol}")
        if k_max < 1:
            raise ConfigError(f"k_max must be at least 1, got {k_max}")
        if not 0 <= seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}")

        self.subcommand = subcommand
        self.tol = tol
        self.seed = seed
        self.k_max = k_max
        self.output_path = output_path
        self.options = options or {}
        self.settings = settings or DEFAULT_CONFIG

    def option(self, name, default=None):
        value = self.options.get(name)
        return default if value is None else value


def _methods(names):
    methods = []
    for name in names:
        if name not in METHOD_CHOICES:
            raise ConfigError(f"unknown method '{name}'")
        methods.extend(m for m in METHOD_CHOICES[name] if m not in methods)
    return methods


def _read_input(config, input_stream):
    path = config.option("input")
    if path and path != "-":
        try:
            with open(path, "r") as f:
                return f.read(), path
        except OSError as e:
            raise MalformedInput(f"cannot read {path}: {e.strerror}")

    if input_stream is None:
        raise MalformedInput("no input document given")
    return input_stream.read(), "<stdin>"


def run_index(config, input_stream):
    text, source = _read_input(config, input_stream)
    blocks = ReturnMapBlocks.from_json(parse_document(text, source))
    require_darwin(blocks, 1e-6 * max(1.0, norm_inf(blocks.matrix)) ** 2)

    methods = _methods([config.option("method", "formula")])

    document = document_header(config.seed, config.tol)
    document["blocks"] = blocks.to_json()
    document["results"] = index_sequence(
        blocks, config.k_max, config.tol, methods, config.seed, config.settings["maslov"])

    return EXIT_OK, dump_document(document)


def run_verify(config, input_stream=None):
    methods = _methods(config.option("methods", config.settings["verify"]["methods"]))
    n = config.option("n", 2)
    trials = config.option("trials", 100)
    if n < 1 or trials < 1:
        raise ConfigError("--n and --trials must be positive")

    report = verify(
        n,
        trials,
        config.k_max,
        config.seed,
        tol=config.tol,
        methods=methods,
        workers=config.settings["verify"]["workers"],
        scale=config.settings["scale"],
        maslov_config=config.settings["maslov"]
    )

    if report["disagreements"]:
        code = EXIT_DISAGREEMENT
    elif report["errors"]:
        code = EXIT_INPUT
    else:
        code = EXIT_OK
    return code, dump_document(report)


def run_cheb(config, input_stream=None):
    degrees = config.option("degrees", list(range(config.k_max + 1)))
    if any(k < 0 for k in degrees):
        raise ConfigError("degrees must be non-negative")

    points = config.option("points", 21)
    if points < 2:
        raise ConfigError("--points must be at least 2")
    grid = np.linspace(-1.0, 1.0, points)

    buffer = io.StringIO()
    buffer.write(f"# v={SCHEMA_VERSION} version={VERSION} seed={config.seed} tol={config.tol!r}\n")

    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["k", "x", "T", "U"])
    for k, x, t, u in cheb_table(degrees, grid):
        writer.writerow([k, repr(x), repr(t), repr(u)])

    return EXIT_OK, buffer.getvalue()


def _seed_point(text):
    try:
        point = simplejson.loads(text)
    except simplejson.JSONDecodeError as e:
        raise MalformedInput(e.msg, line=e.lineno, column=e.colno, field="seed-point")

    if not isinstance(point, list) or not all(isinstance(c, (int, float)) for c in point):
        raise MalformedInput("expected a JSON array of numbers", field="seed-point")

    return np.array(point, dtype=float)


def run_orbit(config, input_stream=None):
    spec = config.option("system")
    if not spec:
        raise MalformedInput("missing system", field="system")

    try:
        system, seed_point, half_period = system_from_spec(spec)
    except ValueError as e:
        raise MalformedInput(str(e), field="system")

    if config.option("seed_point") is not None:
        seed_point = _seed_point(config.option("seed_point"))
        if seed_point.shape != (system.dim,):
            raise MalformedInput(f"expected {system.dim} coordinates", field="seed-point")

    half_period = config.option("half_period", half_period)
    orbit_settings = config.settings["orbit"]

    orbit = find_symmetric_orbit(
        system,
        seed_point,
        half_period,
        tol=config.option("orbit_tol", orbit_settings["tol"]),
        max_iter=orbit_settings["max_iter"],
        integrator=config.settings["integrator"]
    )
    section = build_transverse_section(system, orbit, seed=config.seed)
    blocks = reduced_monodromy(system, orbit, section)

    methods = _methods([config.option("method", "both")])

    document = document_header(config.seed, config.tol)
    document["system"] = system.name
    document["orbit"] = orbit.to_json()
    document["blocks"] = blocks.to_json()
    document["indices"] = index_sequence(
        blocks, config.k_max, config.tol, methods, config.seed, config.settings["maslov"])

    return EXIT_OK, dump_document(document)


HANDLERS = {
    "index": run_index,
    "verify": run_verify,
    "cheb": run_cheb,
    "orbit": run_orbit
}


def run(config, input_stream=None, output_stream=None):
    """
    Execute one subcommand and write its document.

    :returns: exit code, 0 on success, 1 on input or validation errors
        (including ``verify`` trials that raised) and 2 when ``verify`` finds
        methods that disagree
    """
    output_stream = output_stream or sys.stdout

    try:
        code, text = HANDLERS[config.subcommand](config, input_stream)
    except input_errors as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_INPUT
    except SymorbitError as e:
        logger.error(f"{config.subcommand} failed: {type(e).__name__}: {e}")
        return EXIT_INPUT

    if config.output_path:
        with open(config.output_path, "w") as f:
            f.write(text)
    else:
        output_stream.write(text)

    return code
