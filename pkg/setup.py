"""Build script for the optional compiled integrator kernel.

The package is fully functional without the extension (a pure-numpy
fallback is selected at import time), so any failure to cythonize or
compile downgrades to a source-only build instead of aborting.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "holosim._core",
                ["src/holosim/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"skipping compiled kernel ({exc}); pure-numpy fallback will be used")

setup(ext_modules=ext_modules)
