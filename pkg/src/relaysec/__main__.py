import sys

from .cliio import main

sys.exit(main(sys.argv[1:]))
