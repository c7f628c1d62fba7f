"""Session fixtures: regenerate the reduced study CSVs once.

The figures package consumes christoffel-sampling only through its public
CLI and file contract, so the fixture shells out to the installed command
(falling back to the module entry point) rather than importing it.
"""

import shutil
import subprocess
import sys

import pytest

PRESET_RUNS = (
    ("hermite", "hermite"),
    ("cd", "cd"),
    ("weighted-ls", "wls"),
)


def _generator_command() -> list[str]:
    exe = shutil.which("christoffel-sampling")
    if exe:
        return [exe]
    return [sys.executable, "-m", "christoffel_sampling.cli"]


@pytest.fixture(scope="session")
def study_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("studies")
    base = _generator_command()
    for preset, subdir in PRESET_RUNS:
        result = subprocess.run(
            [*base, "preset", preset, "--out", str(root / subdir), "--reps", "2"],
            capture_output=True,
            text=True,
        )
        if result.returncode != 0:
            pytest.fail(f"preset {preset} failed:\n{result.stderr}")
    return root
