from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build without the compiled kernels
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension(
            "tpgr._kernels",
            ["src/tpgr/_kernels.pyx"],
            extra_compile_args=["-O3", "-ffp-contract=off"],
            optional=True,
        )],
        language_level=3,
    )

setup(ext_modules=ext_modules)
