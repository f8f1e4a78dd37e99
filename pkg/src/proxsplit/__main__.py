import sys

from .recover_cli import main

sys.exit(main())
