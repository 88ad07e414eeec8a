#!/usr/bin/env python3
"""
holder-reg entry point.

    python main.py verify all
    python main.py analyze fn-sharp --q 2 data/problems/power2.json
"""

import sys

from lib.cli import main

if __name__ == "__main__":
    sys.exit(main())
