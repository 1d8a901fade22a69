# main.py - Command line entry point
import sys

from src.cli.main_cli import main

if __name__ == "__main__":
    sys.exit(main())
