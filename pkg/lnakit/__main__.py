"""Allow running as: python -m lnakit <command> ..."""
import sys

from .cli import main

sys.exit(main())
