import sys

from thetastrat.cli import main

if __name__ == "__main__":
    sys.exit(main())
