import sys

from nushap.cli import main

sys.exit(main())
