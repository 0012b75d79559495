import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("TABCH_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "tabch._core",
                ["src/tabch/_core.pyx"],
                language="c++",
                extra_compile_args=["-O3", "-fopenmp", "-std=c++17"],
                extra_link_args=["-fopenmp"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
