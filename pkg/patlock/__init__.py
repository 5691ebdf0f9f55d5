#!/usr/bin/env python3
"""
Defect pattern mining for Java code bases.

Failure logs are grouped into defect pattern candidates, patterns are
written as static analysis rules, rules are evaluated against human
verification and refined with exclusion contexts.

"""

from . import constants
from . import errors
from . import source_ast
from . import lexer
from . import javaparser
from . import pattern_dsl
from . import matcher
from . import failures
from . import evaluation
from . import readfile
from . import refine
from . import catalog
from . import cli
