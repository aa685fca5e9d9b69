"""python -m focklab.cli 入口"""

import sys

from .app import main

if __name__ == "__main__":
    sys.exit(main())
