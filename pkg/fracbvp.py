import sys

from controllers.fracbvp_cli import main

if __name__ == "__main__":
    sys.exit(main())
