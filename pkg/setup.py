"""Build script.  The compiled kernel is optional: if Cython or a C compiler
is unavailable the package installs without it and falls back to the pure
Python implementations in maxtype.kernels_py."""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("maxtype._kernels", ["src/maxtype/_kernels.pyx"])],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover
    print(f"maxtype: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
