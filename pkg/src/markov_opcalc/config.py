"""Process-wide settings read from the environment."""

import os

THREADS_ENV = "MARKOV_OPCALC_THREADS"


def threads() -> int:
    """Upper bound on worker threads for per-node work (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pmap(fn, items):
    """Ordered map over ``items``, threaded when ``MARKOV_OPCALC_THREADS > 1``.

    Results come back in input order, so any reduction over them is
    deterministic regardless of scheduling.
    """
    items = list(items)
    n = threads()
    if n > 1 and len(items) > 8:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(n) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]
