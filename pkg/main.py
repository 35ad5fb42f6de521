import sys

from games.cli import run

# Command-line entry point, equivalent to the `kin-games` console script.
if __name__ == "__main__":
    sys.exit(run())
