import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SHAPEREG_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "shapereg._ckernels",
                    ["src/shapereg/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no -ffast-math / -march=native: results must match the
                    # numpy fallback bit for bit
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
