from pathlib import Path

import numpy as np
import pytest

from graphbf.graph import GraphParams, build_graph
from graphbf.imageio import ImageGrid, crop, load_image

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def camera_128():
    return load_image(DATA / "camera_coat_128.pgm")


@pytest.fixture(scope="session")
def coat_64(camera_128):
    """Dark, textured 64x64 block (the coat) used for denoising."""
    return crop(camera_128, 32, 32, 64, 64)


def random_image(h, w, seed, lo=0.0, hi=1.0):
    rng = np.random.default_rng(seed)
    return ImageGrid(rng.uniform(lo, hi, size=(h, w)))


def smooth_random_image(h, w, seed):
    """Random image with spatial correlation, so bilateral weights stay well above underflow."""
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.0, 1.0, size=(h // 4 + 2, w // 4 + 2))
    ys = np.linspace(0, base.shape[0] - 1.001, h)
    xs = np.linspace(0, base.shape[1] - 1.001, w)
    y0, x0 = ys.astype(int), xs.astype(int)
    fy, fx = (ys - y0)[:, None], (xs - x0)[None, :]
    b = base
    img = (
        b[y0][:, x0] * (1 - fy) * (1 - fx)
        + b[y0 + 1][:, x0] * fy * (1 - fx)
        + b[y0][:, x0 + 1] * (1 - fy) * fx
        + b[y0 + 1][:, x0 + 1] * fy * fx
    )
    return ImageGrid(img + 0.02 * rng.standard_normal((h, w)))


@pytest.fixture
def two_pixel_graph():
    """1x2 image: w12 = exp(-1/8) * exp(-0.25 / (2 * 0.5^2)) with radius 1."""
    img = ImageGrid(np.array([[0.2, 0.7]]))
    return build_graph(img, GraphParams(sigma_d=2.0, sigma_r=0.5, radius=1))


def make_block_graphs(camera):
    """Random and natural 8x8 .. 16x16 blocks with the denoising parameters."""
    params = GraphParams(sigma_d=2.0, sigma_r=0.035)
    images = [
        random_image(8, 8, seed=1),
        random_image(12, 12, seed=2),
        smooth_random_image(16, 16, seed=3),
        crop(camera, 0, 0, 16, 16),
        crop(camera, 40, 60, 12, 12),
        crop(camera, 100, 8, 8, 8),
    ]
    return [build_graph(img, params) for img in images]


@pytest.fixture(scope="session")
def block_graphs(camera_128):
    return make_block_graphs(camera_128)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
