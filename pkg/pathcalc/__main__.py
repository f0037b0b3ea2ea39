import sys

from pathcalc.cli import main

sys.exit(main())
