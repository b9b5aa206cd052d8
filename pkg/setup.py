"""Build the optional Cython kernel extension.

The pure-Python kernels in ``optoscatter._core_py`` are used whenever the
extension is missing, so a failed compile only costs speed.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if not os.environ.get("OPTOSCATTER_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "optoscatter._core",
                    ["src/optoscatter/_core.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no -ffast-math: both backends must round identically
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError as exc:
        print(f"optoscatter: building without Cython kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
