"""Build glue for the optional compiled core.

The package is pure Python plus one Cython extension holding the hot loops
(Hamming Gram assembly, diagonal phase tables, Sinkhorn iterations).  The
extension is best-effort: if Cython or a C compiler is missing the build
proceeds and the package falls back to the NumPy implementation at import.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "bornforge._corefast",
                sources=["src/bornforge/_corefast.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
