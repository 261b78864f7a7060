import sys
from pathlib import Path

import numpy as np
import pytest

from refusion import kernels
from refusion.synth import SceneRenderer, benchmark_script, generate

sys.path.insert(0, str(Path(__file__).parent))

STUB = Path(__file__).parent / "stubs" / "echo_backend.py"


@pytest.fixture(params=sorted(kernels.IMPLEMENTATIONS))
def impl(request):
    """Each kernel implementation in turn (numba loops, numpy)."""
    return kernels.IMPLEMENTATIONS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def bench_scene():
    script = benchmark_script(seed=7)
    renderer = SceneRenderer(script)
    frames = list(renderer)
    truth = [renderer.truth(t) for t in range(1, script.frame_count + 1)]
    return renderer, frames, truth


@pytest.fixture(scope="session")
def seq_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("seq")
    generate(benchmark_script(seed=7), out)
    return out


def stub_cmd(mode="normal"):
    return [sys.executable, str(STUB), mode]


# acceptance criteria report: test_acceptance records one verdict per criterion
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {text}")
