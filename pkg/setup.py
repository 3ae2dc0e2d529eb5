"""Build hook: compile the optional Cython kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so any build failure here degrades gracefully to a pure-
Python install.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/wcmo/kernels/_fast.pyx"],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
except ImportError:
    pass

setup(ext_modules=ext_modules)
