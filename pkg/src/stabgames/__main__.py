import sys

from stabgames.cli import main

sys.exit(main())
