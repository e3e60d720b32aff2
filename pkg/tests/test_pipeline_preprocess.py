import io
import random

import numpy as np
import pytest
from PIL import Image

from wildtrap.errors import DecodeError, ValidationError
from wildtrap.geometry import Box
from wildtrap.pipeline import ModelProfile, default_profile, preprocess


def png_bytes(width, height, color=(10, 20, 30)):
    buf = io.BytesIO()
    Image.new("RGB", (width, height), color).save(buf, format="PNG")
    return buf.getvalue()


def test_profile_validation():
    with pytest.raises(ValidationError):
        ModelProfile("m", "r", labels=())
    with pytest.raises(ValidationError):
        ModelProfile("m", "r", labels=("a", "a"))
    with pytest.raises(ValidationError):
        ModelProfile("m", "r", labels=("a",), input_long_side=16)
    assert default_profile().input_long_side == 1024


def test_large_image_scaled_to_long_side():
    pre = preprocess(png_bytes(4000, 3000), default_profile())
    assert (pre.width, pre.height) == (1024, 768)
    assert pre.scale == pytest.approx(0.256, abs=1e-9)
    assert (pre.orig_width, pre.orig_height) == (4000, 3000)


def test_small_image_never_upscaled():
    pre = preprocess(png_bytes(800, 600), default_profile())
    assert (pre.width, pre.height) == (800, 600)
    assert pre.scale == 1.0


def test_aspect_ratio_preserved_within_rounding():
    rng = random.Random(8)
    profile = default_profile()
    for _ in range(20):
        w, h = rng.randint(1100, 4000), rng.randint(1100, 4000)
        pre = preprocess(png_bytes(w, h), profile)
        assert max(pre.width, pre.height) == profile.input_long_side
        expected_minor = min(w, h) * profile.input_long_side / max(w, h)
        assert abs(min(pre.width, pre.height) - expected_minor) <= 1.0


def test_eight_bit_normalization_extremes():
    buf = io.BytesIO()
    arr = np.zeros((4, 4), dtype=np.uint8)
    arr[0, 0] = 255
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    pre = preprocess(buf.getvalue(), default_profile())
    assert pre.pixels[0, 0] == 1.0
    assert pre.pixels[1, 1] == 0.0
    assert pre.pixels.min() >= 0.0 and pre.pixels.max() <= 1.0


def test_sixteen_bit_normalization():
    arr = np.zeros((4, 4), dtype=np.uint16)
    arr[0, 0] = 65535
    arr[0, 1] = 32768
    image = Image.frombytes("I;16", (4, 4), arr.astype("<u2").tobytes())
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    pre = preprocess(buf.getvalue(), default_profile())
    assert pre.pixels[0, 0] == 1.0
    assert pre.pixels[0, 1] == pytest.approx(0.5, abs=1e-4)


def test_sixteen_bit_image_survives_resize():
    # thermal frames wider than the input side go through the resize path
    arr = np.linspace(0, 65535, 1200 * 900).reshape(900, 1200).astype(np.uint16)
    image = Image.frombytes("I;16", (1200, 900), arr.astype("<u2").tobytes())
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    pre = preprocess(buf.getvalue(), default_profile())
    assert (pre.width, pre.height) == (1024, 768)
    assert 0.0 <= pre.pixels.min() and pre.pixels.max() <= 1.0
    assert pre.pixels.max() > 0.99  # bright end preserved through the resize


def test_exif_orientation_applied_before_resize():
    image = Image.new("RGB", (100, 50), (5, 5, 5))
    exif = Image.Exif()
    exif[0x0112] = 6  # rotate 90 CW on display
    buf = io.BytesIO()
    image.save(buf, format="JPEG", exif=exif)
    pre = preprocess(buf.getvalue(), default_profile())
    assert (pre.orig_width, pre.orig_height) == (50, 100)


def test_undecodable_bytes_raise_decode_error():
    with pytest.raises(DecodeError):
        preprocess(b"definitely not an image", default_profile())


def test_coordinate_round_trip_within_tolerance():
    rng = random.Random(9)
    profile = default_profile()
    for _ in range(50):
        w, h = rng.randint(200, 3000), rng.randint(200, 3000)
        scale = min(1.0, profile.input_long_side / max(w, h))
        x0 = rng.uniform(0, w - 2)
        y0 = rng.uniform(0, h - 2)
        box = Box(x0, y0, x0 + rng.uniform(1, w - x0), y0 + rng.uniform(1, h - y0))
        round_tripped = box.scaled(scale).scaled(1.0 / scale)
        for a, b in zip(box.as_list(), round_tripped.as_list()):
            assert abs(a - b) < 1e-6
