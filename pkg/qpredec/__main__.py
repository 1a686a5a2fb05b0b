import sys

from qpredec.cli import main

sys.exit(main())
