# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.
# Build with: sphinx-build -b html . _build

import os
import sys
sys.path.insert(0, os.path.abspath('..'))


# -- Project information -----------------------------------------------------

project = 'patlock'
copyright = '2026, patlock developers'
author = 'patlock developers'

version = ''
release = ''


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'numpydoc'
]

autodoc_mock_imports = ['matplotlib']
numpydoc_show_class_members = False

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
language = 'en'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = None


# -- Options for HTML output -------------------------------------------------

html_theme = 'alabaster'
html_static_path = []
htmlhelp_basename = 'patlockdoc'


# -- Options for manual page output ------------------------------------------

man_pages = [
    (master_doc, 'patlock', 'patlock Documentation',
     [author], 1)
]
