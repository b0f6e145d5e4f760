import sys

from qhul.cli import main

sys.exit(main())
