"""Build script: compiles the optional kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here degrades gracefully to a pure-Python
install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "linefield._kernels",
                ["src/linefield/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # contraction off: classifications must agree bit-exactly
                # with the numpy lane, which never fuses multiply-add
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"kernel extension skipped ({exc}); numpy fallback will be used")

setup(ext_modules=ext_modules)
