from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("sleepscan._core._decode_c", ["src/sleepscan/_core/_decode_c.pyx"])],
        language_level=3,
    )
except ImportError:
    # Pure-Python decoder is selected at import time when the extension is absent.
    ext_modules = []

setup(ext_modules=ext_modules)
