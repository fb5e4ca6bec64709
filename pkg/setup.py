import numpy
from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hhdyn._heom_core",
                ["src/hhdyn/_heom_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Without Cython the package still works through the numpy kernels.
    ext_modules = []

setup(ext_modules=ext_modules)
