"""This script is invoked when running the main module, as in:
``python -m dynsketch``
"""

from dynsketch import cli

raise SystemExit(cli.main())
