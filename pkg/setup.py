#!/usr/bin/python
# Builds on python3
import sys

try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup
cmdclass = {}

try:
    from sphinx.setup_command import BuildDoc
    cmdclass['build_sphinx'] = BuildDoc
except ImportError:
    print('W: [python%s] Sphinx import error.' % sys.version[:3])


setup(name="python-osmoflow",
      description="Gradient flows of osmotically swelling cells",
      version="0.1",
      author="The osmoflow developers",
      packages=['osmoflow', 'osmoflow.progress'],
      scripts=['bin/osmoflow'],
      requires=['numpy', 'scipy'],
      install_requires=['numpy>=1.17', 'scipy>=1.6'],
      cmdclass=cmdclass,
      license='GNU GPL',
      platforms='any')
