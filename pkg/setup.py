from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the package falls back to pure Python kernels
    cythonize = None

extensions = [
    Extension(
        "springerfib._ckernels",
        ["src/springerfib/_ckernels.pyx"],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"})
    if cythonize
    else [],
)
