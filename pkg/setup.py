"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension: facegraph.kernels
falls back to the numpy/scipy reference backend when the compiled module
is absent.  The Extension is marked optional so a missing toolchain does
not break installation.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "facegraph.kernels._native",
                ["src/facegraph/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
