import sys

from vpdebug.cli import main

sys.exit(main())
