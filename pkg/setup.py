"""Build script for the optional Cython kernels.

The extension is optional: when Cython or a C compiler is unavailable the
package installs without it and ``sparsim._backend`` falls back to the
pure-Python kernels.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SPARSIM_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        extensions = [
            Extension(
                "sparsim._ckernels",
                ["src/sparsim/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                # no -ffast-math: both backends must round identically
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ]
        ext_modules = cythonize(
            extensions,
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
