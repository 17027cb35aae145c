"""Build script: compiles the optional Cython kernel.

The extension is a performance core only; if it cannot be built (no compiler),
installation proceeds and the package falls back to the pure-Python kernel.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Tolerate a failed extension build and fall back to pure Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or broken toolchain
            warnings.warn(f"building the compiled kernel failed ({exc}); "
                          "mrrkit will use the pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"building {ext.name} failed ({exc}); "
                          "mrrkit will use the pure-Python fallback")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython not available; mrrkit will use the pure-Python fallback")
        return []
    ext = Extension(
        "mrrkit._kernels._core",
        ["src/mrrkit/_kernels/_core.pyx"],
        # -ffp-contract=off: no FMA fusion, so results are bit-identical to the
        # pure-Python fallback (both call the same libm).
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
