# Configuration file for the Sphinx documentation builder.
import os
import sys

sys.path.insert(0, os.path.abspath('../..'))

from dyadicwalsh import __version__  # noqa: E402

project = 'dyadicwalsh'
copyright = '2026, the dyadicwalsh developers'
author = 'the dyadicwalsh developers'
version = __version__
release = __version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
]
autodoc_member_order = 'bysource'
napoleon_numpy_docstring = True

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = []

html_theme = 'alabaster'
html_static_path = ['_static']
htmlhelp_basename = 'dyadicwalshdoc'

man_pages = [
    (master_doc, 'dyadicwalsh', 'dyadicwalsh Documentation', [author], 1)
]
