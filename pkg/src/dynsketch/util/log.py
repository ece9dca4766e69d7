"""Logging and tracing utilities for internal use"""

from __future__ import annotations

import logging
import sys
import threading
import traceback
import types
from typing import Type

log = logging.getLogger(__name__)


class Log:
    """Exception tracing for the command line and verification worker threads"""

    LEVELS = ["debug", "info", "warning", "error", "critical"]
    """Logging level names accepted on the command line"""

    @classmethod
    def setup_exception_logging_hooks(cls) -> None:
        """Route unhandled exceptions of the main thread (:func:`sys.excepthook`) and
        of other threads (:func:`threading.excepthook`) to the log."""
        sys.excepthook = cls.trace_unhandled_exception
        threading.excepthook = cls.trace_thread_exception

    @staticmethod
    def configure(level: str) -> int:
        """Configure the root logger.

        :param level: one of :attr:`LEVELS`, case-insensitive
        :return: numeric logging level
        :raises ValueError: unknown level name
        """
        if level.lower() not in Log.LEVELS:
            raise ValueError(f"Unknown logging level {level!r}")
        loglevel = getattr(logging, level.upper())
        assert isinstance(loglevel, int)
        logging.basicConfig(level=loglevel)
        return loglevel

    @classmethod
    def trace_unhandled_exception(
        cls,
        exc_type: Type[BaseException],
        exc: BaseException,
        trace_back: types.TracebackType | None,
    ) -> None:
        """Log an unhandled exception at ``CRITICAL`` level and its traceback at
        ``DEBUG`` level; suitable for :func:`sys.excepthook`.

        :param exc_type: exception type
        :param exc: exception object
        :param trace_back: exception traceback
        """
        cls._trace_exception_details(
            loglevel=logging.CRITICAL, exc=exc, exc_type=exc_type, trace_back=trace_back
        )

    @classmethod
    def trace_thread_exception(cls, exc_info: threading.ExceptHookArgs) -> None:
        """Log an exception that escaped a thread, suitable for
        :func:`threading.excepthook`

        :param exc_info: thread exception attributes
        """
        msg = str(exc_info.thread) if exc_info.thread else None
        cls._trace_exception_details(
            loglevel=logging.ERROR,
            exc=exc_info.exc_value,
            exc_type=exc_info.exc_type,
            trace_back=exc_info.exc_traceback,
            msg=msg,
        )

    @classmethod
    def trace_exception(cls, exc: BaseException, msg: str) -> None:
        """Log a caught exception at ``ERROR`` level and its traceback at ``DEBUG``
        level.

        :param exc: exception object
        :param msg: message to prepend
        """
        cls._trace_exception_details(
            loglevel=logging.ERROR,
            exc=exc,
            exc_type=exc.__class__,
            trace_back=exc.__traceback__,
            msg=msg,
        )

    @staticmethod
    def _trace_exception_details(
        *,
        loglevel: int,
        exc: BaseException | None,
        exc_type: Type[BaseException],
        trace_back: types.TracebackType | None,
        msg: str | None = None,
    ) -> None:
        msg_prefix = f"{msg}: " if msg else ""
        log.log(loglevel, "%s%s: %s", msg_prefix, exc_type.__name__, exc)
        if log.isEnabledFor(logging.DEBUG):
            log.debug(
                "".join(
                    traceback.format_exception(exc_type, exc, trace_back)
                ).rstrip("\n")
            )
