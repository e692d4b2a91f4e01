"""Shared pass/fail record for the acceptance criteria."""

import functools

RESULTS: dict[int, tuple[bool, str]] = {}


def criterion(number: int):
    """Record the outcome of a criterion test and print one line for it."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs) or ""
            except Exception as exc:
                RESULTS[number] = (False, f"{type(exc).__name__}: {exc}".splitlines()[0][:160])
                print(f"criterion {number}: FAIL")
                raise
            RESULTS[number] = (True, detail)
            print(f"criterion {number}: PASS {detail}")

        return run

    return wrap
