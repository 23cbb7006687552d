import sys

from setuptools import Extension, setup

# The compiled kernels are an optimisation, not a requirement: if Cython is
# unavailable the package installs pure-Python and rcldpc._kernels falls back
# to the NumPy/SciPy implementations at import time.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
    print("rcldpc: Cython not found, building without compiled kernels", file=sys.stderr)
else:
    ext_modules = cythonize(
        [
            Extension(
                "rcldpc._kernels._core",
                ["src/rcldpc/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
