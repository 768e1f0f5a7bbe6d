import sys

from stackcache.cli import main

sys.exit(main())
