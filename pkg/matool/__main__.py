import sys

from matool.cli import main

sys.exit(main())
