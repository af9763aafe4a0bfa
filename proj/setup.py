"""CMake-driven build of the dlasftc extension module.

The pip mirror used here carries neither scikit-build-core nor scikit-build,
so the wheel is built by delegating to the project's CMakeLists from a custom
build_ext (install with `pip install . --no-build-isolation`).
"""

import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)
        out_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve() / "dlasftc"

        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DDLASFTC_PYTHON_WHEEL=ON",
                "-DCMAKE_BUILD_TYPE=Release",
                f"-DPYTHON_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "dlasftc_python"],
            check=True,
        )

        out_dir.mkdir(parents=True, exist_ok=True)
        module_dir = build_dir / "python" / "dlasftc"
        for artifact in module_dir.glob("_core*"):
            self.copy_file(str(artifact), str(out_dir / artifact.name))
        self.copy_file(
            str(source_dir / "python" / "dlasftc" / "__init__.py"),
            str(out_dir / "__init__.py"),
        )


setup(
    ext_modules=[CMakeExtension("dlasftc._core")],
    cmdclass={"build_ext": CMakeBuild},
    packages=[],
)
