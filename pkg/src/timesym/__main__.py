import sys

from timesym.cli import main

sys.exit(main())
