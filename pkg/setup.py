"""Build script for the optional compiled kernels.

The Cython extension is best-effort: when Cython or a C compiler is
missing the package installs without it and ``fracrd.kernels`` falls back
to the numpy implementation.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("FRACRD_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "fracrd._ckernels",
                    ["src/fracrd/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no FMA contraction: results must match the numpy path bit for bit
                    extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover
        print(f"fracrd: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
