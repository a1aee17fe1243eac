"""Build script for the optional compiled kernel.

The package works without the extension; a failed compile only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "qhol.linalg._modkernel",
                ["src/qhol/linalg/_modkernel.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
