import math

import numpy as np
import pytest

import fuzzygrowcut as fg
from fuzzygrowcut.imaging import ImageFormatError, load_phantom_specs

from conftest import make_disk_phantom
from oracles import rasterized_disk_area


def write_p2(path, width, height, values, maxval=255, comment=None):
    lines = ["P2"]
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"{width} {height}")
    lines.append(str(maxval))
    lines.append(" ".join(str(v) for v in values))
    path.write_text("\n".join(lines) + "\n")


def write_p5(path, width, height, values, maxval=255):
    header = f"P5\n{width} {height}\n{maxval}\n".encode()
    path.write_bytes(header + bytes(values))


class TestLoadImage:
    def test_p2_normalizes_by_255(self, tmp_path):
        path = tmp_path / "a.pgm"
        write_p2(path, 2, 2, [0, 255, 128, 64])
        img = fg.load_image(path)
        assert img.pixels.tolist() == [[0.0, 1.0], [128 / 255, 64 / 255]]

    def test_p5_all_zero(self, tmp_path):
        path = tmp_path / "z.pgm"
        write_p5(path, 3, 2, [0] * 6)
        img = fg.load_image(path)
        assert (img.pixels == 0.0).all()

    def test_p2_with_comments(self, tmp_path):
        path = tmp_path / "c.pgm"
        write_p2(path, 2, 2, [10, 20, 30, 40], comment="made by hand")
        assert fg.load_image(path).pixels[0, 0] == 10 / 255

    def test_16bit_pgm_rejected(self, tmp_path):
        path = tmp_path / "deep.pgm"
        path.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
        with pytest.raises(ImageFormatError, match="16-bit"):
            fg.load_image(path)

    def test_16bit_png_rejected(self, tmp_path):
        from PIL import Image

        path = tmp_path / "deep.png"
        Image.fromarray(np.zeros((4, 4), dtype=np.uint16)).save(path)
        with pytest.raises(ImageFormatError, match="mode"):
            fg.load_image(path)

    def test_rgb_png_rejected(self, tmp_path):
        from PIL import Image

        path = tmp_path / "rgb.png"
        Image.new("RGB", (4, 4)).save(path)
        with pytest.raises(ImageFormatError):
            fg.load_image(path)

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "x.bin"
        path.write_bytes(b"not an image at all")
        with pytest.raises(ImageFormatError, match="unrecognized"):
            fg.load_image(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            fg.load_image(tmp_path / "nope.png")

    def test_truncated_p5(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
        with pytest.raises(ImageFormatError, match="truncated"):
            fg.load_image(path)

    @pytest.mark.parametrize("suffix", [".pgm", ".png"])
    def test_roundtrip_bit_exact(self, tmp_path, suffix):
        rng = np.random.default_rng(1)
        raw = rng.integers(0, 256, size=(9, 7), dtype=np.uint8)
        img = fg.GrayImage(raw / 255.0)
        path = tmp_path / f"r{suffix}"
        fg.save_image(img, path)
        again = fg.load_image(path)
        assert (again.pixels == img.pixels).all()
        fg.save_image(again, path)
        assert (fg.load_image(path).pixels == img.pixels).all()


class TestGrayImageInvariants:
    def test_range_enforced(self):
        with pytest.raises(ValueError):
            fg.GrayImage(np.array([[0.0, 1.5], [0.0, 0.0]]))

    def test_minimum_size(self):
        with pytest.raises(ValueError):
            fg.GrayImage(np.zeros((1, 5)))

    def test_immutable(self):
        img = fg.GrayImage(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1.0


class TestPhantom:
    def test_disk_area_matches_brute_force(self):
        spec, image, mask = make_disk_phantom(r=20.0)
        expected = rasterized_disk_area(spec.cx, spec.cy, 20.0, 128, 128)
        assert mask.area() == expected
        assert abs(mask.area() - math.pi * 400) <= 2 * math.pi * 20

    def test_noiseless_image_is_two_tone(self):
        _, image, _ = make_disk_phantom(sigma=0.0)
        assert len(np.unique(image.pixels)) == 2

    def test_threshold_recovers_mask(self):
        spec, image, mask = make_disk_phantom(sigma=0.0)
        recovered = image.pixels > (spec.fg + spec.bg) / 2.0
        assert (recovered == mask.values).all()

    def test_deterministic(self):
        spec = fg.PhantomSpec(kind="star", noise_sigma=0.05, rng_seed=9)
        a_img, a_mask = fg.synth_phantom(spec)
        b_img, b_mask = fg.synth_phantom(spec)
        assert (a_img.pixels == b_img.pixels).all()
        assert (a_mask.values == b_mask.values).all()

    def test_out_of_bounds_shape(self):
        spec = fg.PhantomSpec(kind="disk", cx=5.0, cy=5.0, rx=30.0, ry=30.0)
        with pytest.raises(ValueError, match="bounds"):
            fg.synth_phantom(spec)

    def test_fg_must_exceed_bg(self):
        with pytest.raises(ValueError):
            fg.PhantomSpec(kind="disk", fg=0.2, bg=0.8)

    def test_negative_noise_rejected(self):
        with pytest.raises(ValueError):
            fg.PhantomSpec(kind="disk", noise_sigma=-0.1)

    def test_star_has_spikes(self):
        spec = fg.PhantomSpec(kind="star", rx=18.0, spikes=7, spike_amp=0.4)
        _, mask = fg.synth_phantom(spec)
        disk = fg.PhantomSpec(kind="disk", rx=18.0, ry=18.0)
        _, disk_mask = fg.synth_phantom(disk)
        assert mask.area() > disk_mask.area()

    def test_spec_json_roundtrip(self, tmp_path):
        spec = fg.sample_phantom_spec("ellipse", 3)
        path = tmp_path / "spec.json"
        import json

        path.write_text(json.dumps(spec.to_json()))
        assert load_phantom_specs(path) == [spec]


class TestMasksAndOverlays:
    def test_mask_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        mask = fg.BinaryMask(rng.random((17, 11)) > 0.5)
        path = tmp_path / "m.png"
        fg.save_mask(mask, path)
        assert (fg.load_mask(path).values == mask.values).all()

    def test_full_mask_contour_is_border_ring(self):
        mask = fg.BinaryMask(np.ones((6, 5), dtype=bool))
        contour = fg.mask_contour(mask)
        expected = np.zeros((6, 5), dtype=bool)
        expected[0, :] = expected[-1, :] = True
        expected[:, 0] = expected[:, -1] = True
        assert (contour == expected).all()

    def test_single_pixel_contour(self):
        mask = np.zeros((5, 5), dtype=bool)
        mask[2, 3] = True
        contour = fg.mask_contour(fg.BinaryMask(mask))
        assert (contour == mask).all()

    def test_overlay_marks_contour_green(self):
        _, image, mask = make_disk_phantom(r=10.0, size=64)
        overlay = fg.contour_overlay(image, mask)
        contour = fg.mask_contour(mask)
        assert (overlay[contour] == (0, 255, 0)).all()
        off = ~contour
        assert (overlay[off][:, 0] == overlay[off][:, 1]).all()

    def test_overlay_dimension_mismatch(self):
        img = fg.GrayImage(np.zeros((4, 4)))
        mask = fg.BinaryMask(np.zeros((5, 5), dtype=bool))
        with pytest.raises(ValueError, match="dimensions"):
            fg.contour_overlay(img, mask)

    def test_overlay_roundtrip(self, tmp_path):
        _, image, mask = make_disk_phantom(r=8.0, size=32)
        overlay = fg.contour_overlay(image, mask)
        path = tmp_path / "o.png"
        fg.save_overlay(overlay, path)
        from PIL import Image

        assert (np.asarray(Image.open(path)) == overlay).all()
