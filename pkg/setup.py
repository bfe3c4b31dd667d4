"""Build the optional Cython core; the package works without it."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("RWA_MARKOV_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("rwa_markov._kernels", ["src/rwa_markov/_kernels.pyx"],
                       include_dirs=[np.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                       extra_compile_args=["-O3", "-fcx-limited-range", "-fno-trapping-math", "-fassociative-math", "-fno-signed-zeros"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
