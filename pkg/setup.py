"""Builds the optional compiled kernels; the package works without them."""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - pure-Python install
    pass
else:
    ext_modules = cythonize(
        [Extension("conecert._kernels", ["src/conecert/_kernels.pyx"], include_dirs=[numpy.get_include()])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
