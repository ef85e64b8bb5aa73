import importlib.util
import sys
from pathlib import Path

import pytest

PLOTS_DIR = Path(__file__).resolve().parents[1]
if str(PLOTS_DIR) not in sys.path:
    # The scripts import their shared reader as a plain module.
    sys.path.insert(0, str(PLOTS_DIR))


def load_script(name):
    spec = importlib.util.spec_from_file_location(
        f"plots_{name}", PLOTS_DIR / f"{name}.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


@pytest.fixture(scope="session")
def preset_results(tmp_path_factory):
    """Small (grid 3, decay off) runs of every sweep preset, written as the
    documented JSON result files."""
    from berrygate.sweeps import preset, result_filename, run_sweep, write_result

    out = tmp_path_factory.mktemp("presets")
    paths = {}
    for name in ("figS1a", "figS1b", "figS1c", "figS1d"):
        spec = preset(name, grid=3)
        spec.decay = False
        result = run_sweep(spec)
        path = out / result_filename(result, "json")
        write_result(result, path, "json")
        paths[name] = path
    return paths
