# -*- coding: utf-8 -*-
#
# osmoflow documentation build configuration file
#
# This file is execfile()d with the current directory set to its containing
# dir.
import os
import sys

# Use the sources of the checkout, not an installed copy.
sys.path.insert(0, os.path.abspath("../.."))

# -- General configuration ---------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest',
              'sphinx.ext.intersphinx', 'sphinx.ext.todo',
              'sphinx.ext.mathjax']

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable', None),
                       'scipy': ('https://docs.scipy.org/doc/scipy', None)}

templates_path = ['templates']
source_suffix = '.rst'
master_doc = 'contents'

project = u'osmoflow'
copyright = u'2026, The osmoflow developers'

try:
    release = os.environ['OSMOFLOW_VERSION']
except KeyError:
    release = '0.1'
version = '.'.join(release.split('.')[:2])

exclude_trees = []
pygments_style = 'sphinx'
autodoc_member_order = 'bysource'

# -- Options for HTML output -------------------------------------------------

html_static_path = []
html_last_updated_fmt = '%b %d, %Y'
htmlhelp_basename = 'osmoflowdoc'

# -- Options for LaTeX output ------------------------------------------------

latex_documents = [
    ('contents', 'osmoflow.tex', u'osmoflow Documentation',
     u'The osmoflow developers', 'manual'),
]

todo_include_todos = True
