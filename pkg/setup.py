import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# The Bloch-evolution inner loop is the only compiled piece; everything else
# is pure Python.  A numpy fallback with identical semantics lives in
# qsense._kernels.fallback, so a failed build of this extension only costs
# speed, not correctness.
ext = Extension(
    "qsense._kernels._evolve",
    ["src/qsense/_kernels/_evolve.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3", "-fopenmp"],
    extra_link_args=["-fopenmp"],
)

setup(ext_modules=cythonize([ext], language_level="3"))
