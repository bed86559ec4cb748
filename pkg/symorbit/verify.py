from threading import Thread

import numpy as np
from more_itertools import chunked

from .darwin import nondegeneracy_check, random_return_map
from .errors import PathDependence, SymorbitError, degeneracy_errors
from .hormander import Method, evaluate_index
from .logger import Logger
from .utils import document_header

logger = Logger("verify")


def trial_seeds(seed, trials):
    return [int(s) for s in np.random.SeedSequence(int(seed)).generate_state(trials, dtype=np.uint64)]


def run_trial(n, trial_seed, k_max, tol=1e-8, methods=("formula", "qform", "paths"), scale=0.5,
              maslov_config=None):
    """
    Evaluate every method on one random Darwin return map at each
    nondegenerate iterate.

    Each comparison holds the doubled value per method, or the name of the
    degeneracy that method ran into. A method that fails where Phi^k and
    Phi^2k are both nondegenerate counts as a disagreement.
    """
    methods = [Method(method) for method in methods]
    blocks = random_return_map(n, trial_seed, scale)
    report = nondegeneracy_check(blocks, 2 * k_max)

    comparisons = []
    for k in range(1, k_max + 1):
        if not report.is_nondegenerate(k):
            comparisons.append({"k": k, "status": "degenerate", "values": {}})
            continue

        values = {}
        failed = False
        for method in methods:
            try:
                values[method.value] = evaluate_index(blocks, k, method, tol, trial_seed, maslov_config).s.doubled
            except PathDependence as e:
                values[method.value] = type(e).__name__
                failed = True
            except degeneracy_errors as e:
                values[method.value] = type(e).__name__

        numbers = [value for value in values.values() if isinstance(value, int)]
        if failed:
            status = "disagree"
        elif len(numbers) < len(values):
            status = "disagree" if report.is_nondegenerate(2 * k) else "skipped"
        else:
            status = "agree" if len(set(numbers)) == 1 else "disagree"

        comparisons.append({"k": k, "status": status, "values": values})

    return {"seed": trial_seed, "blocks": blocks.to_json(), "comparisons": comparisons}


def _run_trial_threaded(args, kwargs, results, index):
    try:
        results[index] = run_trial(*args, **kwargs)
    except SymorbitError as e:
        results[index] = {"seed": args[1], "error": f"{type(e).__name__}: {e}", "comparisons": []}


def verify(n, trials, k_max, seed, tol=1e-8, methods=("formula", "qform", "paths"), workers=4,
           scale=0.5, maslov_config=None):
    seeds = trial_seeds(seed, trials)
    results = [None] * trials

    for batch in chunked(range(trials), max(1, workers)):
        threads = []
        for index in batch:
            thread = Thread(
                target=_run_trial_threaded,
                args=((n, seeds[index], k_max),
                      {"tol": tol, "methods": methods, "scale": scale, "maslov_config": maslov_config},
                      results, index))
            thread.start()
            threads.append(thread)

        for thread in threads:
            thread.join()

        logger.info(f"Trials {batch[0] + 1}-{batch[-1] + 1} of {trials} done")

    comparisons = agreements = skipped = 0
    disagreements = []
    errors = []

    for index, result in enumerate(results):
        if "error" in result:
            errors.append({"trial": index, "seed": result["seed"], "error": result["error"]})
            continue

        for comparison in result["comparisons"]:
            status = comparison["status"]
            if status == "degenerate":
                continue
            if status == "skipped":
                skipped += 1
                continue

            comparisons += 1
            if status == "agree":
                agreements += 1
            else:
                logger.error(f"Trial {index} (seed {result['seed']}), k = {comparison['k']}: "
                             f"methods disagree {comparison['values']}")
                disagreements.append({
                    "trial": index,
                    "seed": result["seed"],
                    "k": comparison["k"],
                    "blocks": result["blocks"],
                    "values": comparison["values"]
                })

    report = document_header(seed, tol)
    report.update({
        "n": n,
        "trials": trials,
        "k_max": k_max,
        "methods": [Method(method).value for method in methods],
        "comparisons": comparisons,
        "agreements": agreements,
        "skipped": skipped,
        "disagreements": disagreements,
        "errors": errors
    })

    return report
