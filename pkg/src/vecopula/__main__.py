import sys

from vecopula.cli import main

sys.exit(main())
