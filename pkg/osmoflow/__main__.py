"""Run the command line driver: python -m osmoflow."""
import sys

from osmoflow.cli import main

sys.exit(main(sys.argv))
