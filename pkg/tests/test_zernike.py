import numpy as np
import pytest

import fuzzygrowcut as fg
from fuzzygrowcut.zernike import (
    DESCRIPTOR_LENGTH,
    LOW_ORDER_COUNT,
    MOMENT_INDICES,
    feature_names,
    split_low_high,
    validate_index,
)

from conftest import make_disk_phantom


class TestRadialPolynomial:
    def test_r00_is_one(self):
        for rho in (0.0, 0.3, 0.77, 1.0):
            assert fg.radial_poly(0, 0, rho) == 1.0

    def test_r11_is_identity(self):
        for rho in (0.0, 0.25, 0.6, 1.0):
            assert fg.radial_poly(1, 1, rho) == rho

    def test_r20_symbolic_expansion(self):
        # single even radial term: 2*rho^2 - 1
        assert fg.radial_poly(2, 0, 0.5) == -0.5
        for rho in (0.0, 0.4, 1.0):
            assert fg.radial_poly(2, 0, rho) == 2 * rho ** 2 - 1

    def test_invalid_parity_rejected(self):
        with pytest.raises(ValueError, match="even"):
            fg.radial_poly(3, 0, 0.5)

    def test_repetition_bound(self):
        with pytest.raises(ValueError):
            fg.radial_poly(2, 4, 0.5)

    def test_vectorized_matches_scalar(self):
        rhos = np.linspace(0.0, 1.0, 11)
        vec = fg.radial_poly(6, 2, rhos)
        assert vec.tolist() == [fg.radial_poly(6, 2, float(r)) for r in rhos]


class TestIndexSet:
    def test_exactly_64_indices(self):
        assert len(MOMENT_INDICES) == DESCRIPTOR_LENGTH == 64

    def test_lexicographic_order(self):
        assert list(MOMENT_INDICES) == sorted(MOMENT_INDICES)

    def test_all_valid(self):
        for n, m in MOMENT_INDICES:
            validate_index(n, m)
            assert m >= 0 and n <= 14

    def test_low_high_partition(self):
        vec = np.arange(64.0)
        low, high = split_low_high(vec)
        assert len(low) == len(high) == LOW_ORDER_COUNT
        assert low[0] == 0.0 and high[-1] == 63.0

    def test_feature_names_match_indices(self):
        names = feature_names()
        assert names[0] == "z_0_0"
        assert names[-1] == "z_14_14"
        assert len(names) == 64


class TestZernikeMoment:
    def test_zero_image_gives_zero(self):
        image = np.zeros((16, 16))
        for n, m in ((0, 0), (2, 0), (4, 2)):
            assert fg.zernike_moment(image, n, m) == 0j

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(1)
        image = rng.random((24, 24))
        for n, m in ((1, 1), (3, 1), (4, 2), (6, 4)):
            z_pos = fg.zernike_moment(image, n, m)
            z_neg = fg.zernike_moment(image, n, -m)
            assert abs(z_neg - z_pos.conjugate()) < 1e-12

    def test_linearity_in_intensity(self):
        rng = np.random.default_rng(2)
        image = rng.random((16, 16)) * 0.5
        z1 = fg.zernike_moment(image, 4, 2)
        z2 = fg.zernike_moment(2.0 * image, 4, 2)
        assert abs(z2 - 2.0 * z1) < 1e-12

    def test_rotation_invariance_on_centered_disk(self):
        _, _, mask = make_disk_phantom(r=30.0)
        values = mask.values.astype(float)
        for n, m in MOMENT_INDICES:
            z0 = abs(fg.zernike_moment(values, n, m))
            z90 = abs(fg.zernike_moment(np.rot90(values), n, m))
            assert abs(z0 - z90) <= max(0.01 * max(z0, z90), 1e-9)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError, match="square"):
            fg.zernike_moment(np.zeros((4, 6)), 0, 0)


class TestDescriptor:
    def test_length_and_nonnegative(self):
        _, _, mask = make_disk_phantom(r=10.0, size=64)
        vec = fg.descriptor(mask)
        assert vec.shape == (64,)
        assert (vec >= 0.0).all()

    def test_mass_moment_positive(self):
        _, _, mask = make_disk_phantom(r=6.0, size=32)
        assert fg.descriptor(mask)[0] > 0.0

    def test_translation_invariance_exact(self):
        base = np.zeros((64, 64), dtype=bool)
        base[20:33, 14:29] = True
        base[24:28, 29:37] = True
        shifted = np.roll(np.roll(base, 5, axis=0), 3, axis=1)
        a = fg.descriptor(fg.BinaryMask(base))
        b = fg.descriptor(fg.BinaryMask(shifted))
        assert (a == b).all()

    def test_empty_mask_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            fg.descriptor(fg.BinaryMask(np.zeros((8, 8), dtype=bool)))

    def test_disk_and_star_signatures_differ(self):
        _, _, disk = make_disk_phantom(r=20.0)
        spec = fg.PhantomSpec(kind="star", rx=16.0, spikes=7, spike_amp=0.4)
        _, star = fg.synth_phantom(spec)
        d = fg.descriptor(disk)
        s = fg.descriptor(star)
        assert np.linalg.norm(d - s) > 0.0

    def test_deterministic_bitwise(self):
        spec = fg.PhantomSpec(kind="star", rx=15.0, spikes=6, spike_amp=0.35)
        _, mask = fg.synth_phantom(spec)
        a = fg.descriptor(mask)
        b = fg.descriptor(mask)
        assert (a == b).all()

    def test_rotation_invariance_of_descriptor(self):
        spec = fg.PhantomSpec(kind="ellipse", rx=24.0, ry=15.0)
        _, mask = fg.synth_phantom(spec)
        a = fg.descriptor(mask)
        b = fg.descriptor(fg.BinaryMask(np.rot90(mask.values)))
        rel = np.abs(a - b) / np.maximum(np.maximum(a, b), 1e-9)
        assert rel.max() <= 0.01

    def test_grayscale_source(self):
        spec, image, mask = make_disk_phantom(r=10.0, size=48, sigma=0.05)
        plain = fg.descriptor(mask)
        weighted = fg.descriptor(mask, image.pixels)
        assert plain.shape == weighted.shape
        assert not np.array_equal(plain, weighted)
