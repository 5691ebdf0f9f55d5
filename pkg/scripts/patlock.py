#!/usr/bin/env python3

# patlock
# Script running the defect pattern pipeline from a working folder.
# Settings are read from patlock_settings.yaml in the working folder,
# copied from input_settings/, and overridden by command line flags.
#
# Example:
#   patlock.py scan --rule unchecked_integer.scpl --source src/


import sys

from patlock import cli


def main():
    sys.exit(cli.main(sys.argv[1:]))


if __name__ == "__main__":
    main()
