"""Entry point for fpinv when run as a module"""

import sys

from fpinv.cli import main

if __name__ == "__main__":
    sys.exit(main())
