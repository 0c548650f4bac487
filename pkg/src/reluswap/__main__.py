import sys

from reluswap.cli import main

sys.exit(main())
