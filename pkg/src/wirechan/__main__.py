import sys

from wirechan.cli import main

sys.exit(main())
