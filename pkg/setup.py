from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # numpy fallback only
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("cavity_teleport._kernels", ["src/cavity_teleport/_kernels.pyx"], optional=True)],
        language_level=3,
    )

setup(ext_modules=ext_modules)
