"""Call-coverage ledger for the public operations.

Public functions are registered with ``@tracked`` at import time; every call
bumps a counter.  The harness resets the counters before a campaign and
reports which registered operations were never reached.
"""
import functools
from collections import Counter

REGISTERED: dict = {}
CALLS: Counter = Counter()


def tracked(fn):
    name = f"{fn.__module__.rsplit('.', 1)[-1]}.{fn.__qualname__}"
    REGISTERED[name] = fn

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        CALLS[name] += 1
        return fn(*args, **kwargs)

    return wrapper


def reset() -> None:
    CALLS.clear()


def snapshot() -> dict:
    return {name: CALLS.get(name, 0) for name in sorted(REGISTERED)}


def uncovered() -> list:
    return sorted(name for name in REGISTERED if CALLS.get(name, 0) == 0)
