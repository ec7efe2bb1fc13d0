import numpy as np
import pytest


@pytest.fixture
def checker_image(tmp_path):
    """Deterministic 32x32 RGB checkerboard saved as PNG."""
    from PIL import Image

    yy, xx = np.mgrid[0:32, 0:32]
    pixels = np.zeros((32, 32, 3), dtype=np.uint8)
    pixels[..., 0] = ((yy // 8 + xx // 8) % 2) * 255
    pixels[..., 1] = (xx * 8) % 256
    pixels[..., 2] = (yy * 8) % 256
    path = tmp_path / "images" / "checker.png"
    path.parent.mkdir()
    Image.fromarray(pixels).save(path)
    return path
