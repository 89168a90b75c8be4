import sys

from autopriv.cli import main

sys.exit(main())
