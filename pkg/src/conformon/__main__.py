import sys

from conformon.cli import main

sys.exit(main())
