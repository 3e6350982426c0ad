"""
Module for shared helpers and common data handling.

This module contains the packaged default settings, a small result cache
that the experiment layer uses to keep derived data around between simulation runs,
and the atomic file writer used for every output of the package.
"""
from __future__ import annotations

import csv
import importlib.metadata
import logging
import os
import tempfile

from contextlib import contextmanager
from functools import lru_cache, wraps
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Sequence, TextIO, TypeVar

import yaml

__all__ = [
    "get_package_version",
    "default",
    "load_defaults",
    "Store",
    "store",
    "atomic_open",
    "write_table",
]

logger = logging.getLogger(__name__)

T = TypeVar("T")
"""A type variable for generics."""


def get_package_version() -> str:
    """Return the version of the ``pipelock`` package."""
    try:
        return importlib.metadata.version('pipelock')
    except importlib.metadata.PackageNotFoundError:
        return 'unknown'


def default(arg: Any, default: Any = None, *, boolean: bool = True) -> Any:  # noqa: F402
    """Return ``arg`` if it evaluates to ``True``, else return ``default``.

    Set ``boolean`` to ``False`` to only test for ``arg is None``.

    Args:
        arg: The data to test.
        default: The default value to return if no data is present.
        boolean: Return the default if `arg` evaluates to False.

    Returns:
        The data if present, else the default.
    """
    if boolean:
        return arg if arg else default
    return default if arg is None else arg


@lru_cache
def load_defaults() -> dict[str, Any]:
    """Load the packaged default settings from ``defaults.yaml``.

    The returned mapping is shared, callers must not modify it.
    """
    return yaml.safe_load((Path(__file__).parent / 'defaults.yaml').read_text(encoding='utf-8'))


class Store(object):
    """A keyed cache for data derived from a trace."""

    _data: dict[Any, Any]

    def __init__(self) -> None:
        """Initialize a new ``Store``."""
        self._data = dict()

    def load(self, key: Any, default: Any = None) -> Any:  # noqa: F402
        """Load data from the cache.

        Args:
            key: The key to load.
            default: The default value to return if the key is not present.

        Returns:
            The data if present, else the default.
        """
        return self._data.get(key, default)

    def __getitem__(self, item: Any) -> Any:
        return self._data[item]

    def __setitem__(self, key: Any, value: Any) -> None:
        self._data[key] = value

    def __contains__(self, item: Any) -> bool:
        return item in self._data

    def clear(self) -> None:
        """Drop everything that has been cached."""
        self._data.clear()


def store(name: str | Callable[..., T] = None) -> Callable[..., T]:
    """
    Decorator / decorator factory to apply to a ``Store`` method
    to cache the return value of the decorated method
    under the key ``(name, *args, *sorted(kwargs.items()))``.
    ``name`` defaults to the method name.
    The method is only called on a cache miss.
    """
    def decorator(method: Callable[..., T]) -> Callable[..., T]:
        @wraps(method)
        def wrapper(self: Store, *args: Any, **kwargs: Any) -> T:
            if not isinstance(self, Store):
                return method(self, *args, **kwargs)
            key = (name or method.__name__, *args, *sorted(kwargs.items()))
            if key not in self:
                self[key] = method(self, *args, **kwargs)
            return self[key]

        return wrapper

    if isinstance(name, str) or name is None:
        return decorator

    if callable(name):
        m = name
        name = m.__name__
        return decorator(m)

    raise ValueError('You need to apply this decorator to a method of a Store!')


@contextmanager
def atomic_open(path: str | os.PathLike) -> Iterator[TextIO]:
    """Open ``path`` for writing text so that it only appears once it is completely written.

    The content goes to a temporary file in the same directory which is renamed over ``path``
    when the ``with`` block exits without an exception.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=path.parent)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as fp:
            yield fp
        os.replace(tmp, path)
        logger.debug("Wrote %s", path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_table(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV file with ``\\n`` line endings through :func:`atomic_open`.

    Floats are written in their shortest round-trip form, so equal results give equal files.

    Returns:
        The path of the file.
    """
    with atomic_open(path) as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
    return Path(path)
