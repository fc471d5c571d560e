import sys

from finitekey.cli import main

sys.exit(main())
