"""Allow ``python -m pmco``."""

import sys

from .cli import main

sys.exit(main())
