import os
import platform

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Fall back to the pure-Python kernels when the extension cannot be built."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled GF(2^8) core not built ({exc}); using pure-Python kernels")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); using pure-Python kernels")


def extensions():
    if os.environ.get("HCDC_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    args = ["-O3"]
    if platform.machine().lower() in ("x86_64", "amd64"):
        args.append("-mssse3")
    ext = Extension(
        "hypercube_cdc._gfcore",
        ["src/hypercube_cdc/_gfcore.pyx"],
        include_dirs=["src/hypercube_cdc"],
        depends=["src/hypercube_cdc/_gfsimd.h"],
        extra_compile_args=args,
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
