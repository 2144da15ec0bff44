import sys

from molnull.cli import main

sys.exit(main())
