import sys

from brainbench.bench.cli import main

sys.exit(main())
