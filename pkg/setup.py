"""Build script for the compiled RK4 moment kernel.

The extension is optional at runtime: ``brillouin_memory.kernels`` falls back
to a pure-numpy implementation when the compiled module cannot be imported.
"""
import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "brillouin_memory._rk4",
        ["src/brillouin_memory/_rk4.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
