import sys

from pyplancherel.cli import main

sys.exit(main())
