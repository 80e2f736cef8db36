"""Operation counting for cost reports.

Functions wrapped with :func:`counted` bump the active :class:`OpCounter`
(if any).  Counting is off unless a counter is installed with
:func:`counting`.
"""
import contextlib
import contextvars
import functools
from collections import Counter

KINDS = ("hash", "encode", "scalar_mul", "point_add", "xor", "random")

_active = contextvars.ContextVar("gridauth_counter", default=None)


class OpCounter(Counter):
    def snapshot(self):
        return {k: self.get(k, 0) for k in KINDS}


def bump(kind, n=1):
    c = _active.get()
    if c is not None:
        c[kind] += n


def counted(kind):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            bump(kind)
            return fn(*args, **kwargs)
        return wrapper
    return deco


@contextlib.contextmanager
def counting():
    counter = OpCounter()
    token = _active.set(counter)
    try:
        yield counter
    finally:
        _active.reset(token)
