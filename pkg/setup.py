from setuptools import setup

# The compiled kernels are optional: without Cython (or a working C
# toolchain) the package falls back to the pure-Python twin in
# swarmform.kernels._pykernels.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/swarmform/kernels/_ckernels.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
