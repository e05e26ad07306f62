"""Build the optional Cython core; the package works without it."""
import os

from setuptools import setup


def extensions():
    if os.environ.get("KDEBOUNDS_PURE_PYTHON", "") not in ("", "0"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "kdebounds._ext",
        ["src/kdebounds/_ext.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=extensions())
