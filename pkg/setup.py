"""Build script: compiles the accelerated scoring kernel when Cython and a C
compiler are available; otherwise installs the pure-NumPy fallback only."""
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np

    ext_modules = cythonize(
        "src/perception_net/kernels/_accel.pyx",
        compiler_directives={"language_level": "3"},
    )
    include_dirs = [np.get_include()]
except ImportError:
    include_dirs = []

setup(
    ext_modules=ext_modules,
    include_dirs=include_dirs,
)
