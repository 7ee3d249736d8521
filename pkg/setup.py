import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the pure-Python fallback is used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("coxtet._kernels", ["src/coxtet/_kernels.pyx"], include_dirs=[np.get_include()])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
