# -*- coding: utf-8 -*-
#
# Sphinx configuration for the ponsim documentation.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))

# -- Project information -----------------------------------------------------

project = 'ponsim'
copyright = "2023-2026, the ponsim developers"
author = 'the ponsim developers'

version = ''
release = ''

# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
    'sphinx.ext.intersphinx'
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'networkx': ('https://networkx.org/documentation/stable/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'pandas': ('https://pandas.pydata.org/docs/', None),
    'simpy': ('https://simpy.readthedocs.io/en/latest/', None),
}

autosummary_generate = True

templates_path = []
source_suffix = '.rst'
master_doc = 'index'
language = 'en'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store', 'README.md']
pygments_style = 'sphinx'

# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = []
htmlhelp_basename = 'ponsimdoc'

numfig = True

# -- Options for LaTeX and manual pages --------------------------------------

latex_documents = [
    (master_doc, 'ponsim.tex', 'ponsim Documentation', 'ponsim', 'manual'),
]

man_pages = [
    (master_doc, 'ponsim', 'ponsim Documentation', [author], 1)
]
