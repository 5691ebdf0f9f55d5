#!/usr/bin/env python3

"""

constants
=========

This module contains constants shared by the pipeline stages:
process exit codes, default gate thresholds and file conventions.

"""


# Process exit codes of the command line front end.
# The sysexits.h values are used for usage, data and I/O errors.
EXIT_OK = 0
EXIT_GATE_FAIL = 1
EXIT_LOG_FORMAT = 2
EXIT_UNLABELED = 3
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_IOERR = 74

# Precision level a rule must reach before deployment.
# Companies set their own level, 80% is a common choice.
DEFAULT_MIN_PRECISION = 0.8
# Relative recall level. Unity means no defect in the broad search
# candidate set may be missed by the rule.
DEFAULT_MIN_RECALL = 1.0
# Smallest failure cluster flagged as a defect pattern candidate.
DEFAULT_MIN_CLUSTER = 2

# Placeholder replacing parameter values in failure messages.
PLACEHOLDER = '<value>'

# File conventions
SOURCE_GLOB = '**/*.java'
DOC_SUFFIX = '.doc'
SETTINGS_FILE = 'patlock_settings.yaml'

# Environment variable toggling ANSI colours in text output.
COLOR_ENV = 'PATLOCK_COLOR'
TRUTHY = ('1', 'true', 'yes', 'on')
