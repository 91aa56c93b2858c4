"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed build of ``coherence_cs._kernels`` should not make
the install unusable -- but in a normal environment with cython + a C
compiler the extension is built and becomes the default backend.
"""

import numpy as np
from setuptools import Extension, setup

from Cython.Build import cythonize

extensions = [
    Extension(
        "coherence_cs._kernels",
        ["src/coherence_cs/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
