import sys

from dyadicwalsh.cli import main

sys.exit(main())
