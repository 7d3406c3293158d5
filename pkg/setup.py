"""Build shim for the optional compiled kernel extension.

The package is pure Python plus one Cython extension holding the hot
pointwise field kernels.  If Cython or a C compiler is unavailable the
extension is simply skipped and the NumPy fallback kernels are used at
runtime; nothing else changes.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "spectralns._kernels_cy",
                ["src/spectralns/_kernels_cy.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off keeps the C arithmetic bit-identical
                # to the NumPy fallback (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
