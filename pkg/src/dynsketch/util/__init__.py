"""General-purpose utilities for internal use."""

from dynsketch.util.crypt import Cryptography
from dynsketch.util.fs import FileSystem
from dynsketch.util.log import Log
from dynsketch.util.time import Time
