import math

import numpy as np
import pytest

import fuzzygrowcut as fg
from fuzzygrowcut.fuzzy import center_cell, fuzzy_step, membership_grid

from conftest import make_disk_phantom, ring_seeds, displace_outside
from oracles import brute_fuzzy_step


def object_seeds(points):
    return fg.SeedSet.from_points(points)


class TestCenterOfMass:
    def test_square_symmetry(self):
        assert fg.center_of_mass(object_seeds([(0, 0), (2, 0), (0, 2), (2, 2)])) == (1.0, 1.0)

    def test_singleton(self):
        assert fg.center_of_mass(object_seeds([(5, 7)])) == (5.0, 7.0)

    def test_plain_mean(self):
        assert fg.center_of_mass(object_seeds([(0, 0), (3, 0)])) == (1.5, 0.0)

    def test_background_seed_rejected(self):
        seeds = fg.SeedSet.from_labeled([(0, 0, fg.OBJECT), (1, 1, fg.BACKGROUND)])
        with pytest.raises(ValueError, match="object seeds only"):
            fg.center_of_mass(seeds)


class TestFitGaussian:
    def test_population_spread(self):
        model = fg.fit_gaussian(object_seeds([(0, 0), (4, 0), (0, 4), (4, 4)]), 1.0, 1.0)
        assert (model.x_m, model.y_m) == (2.0, 2.0)
        assert model.s_x == 2.0 and model.s_y == 2.0
        assert model.floored == ()

    def test_degenerate_axis_floored(self):
        model = fg.fit_gaussian(object_seeds([(1, 3), (5, 3)]))
        assert model.s_y == 1.0
        assert model.floored == ("y",)
        assert model.s_x == 2.0

    def test_annealed_disk_seeds_center_inside(self):
        _, image, truth = make_disk_phantom(r=28.0)
        seeds = fg.anneal(image, fg.roi_sa_config(rng_seed=1))
        model = fg.fit_gaussian(seeds)
        assert truth.values[int(round(model.y_m)), int(round(model.x_m))]


class TestMembership:
    MODEL = fg.GaussianModel(x_m=10.0, y_m=20.0, s_x=3.0, s_y=5.0,
                             alpha_x=2.0, alpha_y=1.5)

    def test_peak_at_center(self):
        mu_obj, mu_bkg = fg.membership(self.MODEL, 10.0, 20.0)
        assert mu_obj == 1.0 and mu_bkg == 0.0

    def test_analytic_one_sigma_point(self):
        m = self.MODEL
        x = m.x_m + m.s_x * math.sqrt(2.0 * m.alpha_x)
        mu_obj, _ = fg.membership(m, x, m.y_m)
        assert mu_obj == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_even_symmetry(self):
        for d in (0.5, 1.7, 4.0, 9.3):
            left, _ = fg.membership(self.MODEL, self.MODEL.x_m - d, 20.0)
            right, _ = fg.membership(self.MODEL, self.MODEL.x_m + d, 20.0)
            assert left == right

    def test_partition_of_unity(self):
        rng = np.random.default_rng(0)
        xs = rng.uniform(-50, 50, 500)
        ys = rng.uniform(-50, 50, 500)
        mu_obj, mu_bkg = fg.membership(self.MODEL, xs, ys)
        assert (mu_bkg == 1.0 - mu_obj).all()
        assert np.abs(mu_obj + mu_bkg - 1.0).max() < 1e-12
        assert (mu_obj > 0.0).all() and (mu_obj <= 1.0).all()


class TestModelStrength:
    def test_object_zone_keeps_cell_strength(self):
        assert fg.model_strength(0.3, mu_obj=0.9, mu_bkg=0.1) == 0.3

    def test_background_zone_full_strength(self):
        assert fg.model_strength(0.3, mu_obj=0.1, mu_bkg=0.9) == 1.0

    def test_tie_goes_to_object_branch(self):
        assert fg.model_strength(0.3, mu_obj=0.5, mu_bkg=0.5) == 0.3

    def test_membership_sum_validated(self):
        with pytest.raises(ValueError):
            fg.model_strength(0.3, mu_obj=0.7, mu_bkg=0.7)


class TestInitFuzzy:
    def test_single_unit_strength_cell(self):
        image = np.full((8, 8), 0.5)
        grid = fg.init_fuzzy(image, object_seeds([(1, 1), (6, 2), (3, 5)]))
        assert grid.strengths.sum() == 1.0
        assert (grid.labels == fg.OBJECT).sum() == 1

    def test_center_cell_of_square(self):
        image = np.full((4, 4), 0.5)
        grid = fg.init_fuzzy(image, object_seeds([(0, 0), (2, 0), (0, 2), (2, 2)]))
        assert grid.labels[1, 1] == fg.OBJECT
        assert grid.strengths[1, 1] == 1.0

    def test_halfway_tie_rounds_toward_brightest_seed(self):
        image = np.zeros((4, 6))
        image[0, 0] = 0.2
        image[0, 5] = 0.9  # brightest seed pulls the .5 tie its way
        seeds = object_seeds([(0, 0), (5, 0)])
        assert center_cell(image, seeds) == (3, 0)
        dim = np.zeros((4, 6))
        dim[0, 0] = 0.9
        dim[0, 5] = 0.2
        assert center_cell(dim, seeds) == (2, 0)


def small_model(x_m, y_m, halfwidth):
    # mu = 1/2 exactly `halfwidth` pixels from the center on each axis
    alpha = halfwidth ** 2 / (2.0 * math.log(2.0))
    return fg.GaussianModel(x_m, y_m, 1.0, 1.0, alpha, alpha)


class TestFuzzyStep:
    def test_neighbor_of_seed_conquered_at_full_strength(self):
        image = np.full((7, 7), 0.5)
        grid = fg.init_fuzzy(image, object_seeds([(3, 3)]))
        model = small_model(3.0, 3.0, 10.0)
        after, changed = fuzzy_step(grid, model)
        assert after.labels[3, 4] == fg.OBJECT
        assert after.strengths[3, 4] == 1.0
        assert changed > 0

    def test_background_zone_labels_never_transferred(self):
        # p and its whole neighborhood sit outside the model: label frozen
        image = np.full((9, 9), 0.5)
        grid = fg.init_fuzzy(image, object_seeds([(1, 1)]))
        model = small_model(1.0, 1.0, 2.0)
        mu_obj, mu_bkg = membership_grid(model, 9, 9)
        far = (mu_bkg > mu_obj)
        current = grid
        for _ in range(12):
            current, changed = fuzzy_step(current, model)
            assert (current.labels[7:, 7:] == fg.UNLABELED).all()
            if changed == 0:
                break
        assert far[8, 8]

    def test_five_cell_line_converges_to_model_support(self):
        image = np.full((1, 5), 0.5)
        seeds = object_seeds([(1, 0), (2, 0), (3, 0)])
        assert fg.center_of_mass(seeds) == (2.0, 0.0)
        grid = fg.init_fuzzy(image, seeds)
        # mu_obj >= mu_bkg exactly on cells 1..3: 2*alpha*s^2 = 2
        model = fg.GaussianModel(2.0, 0.0, 1.0, 1.0, 1.0, 1.0)
        mu_obj, mu_bkg = membership_grid(model, 5, 1)
        assert ((mu_obj >= mu_bkg) == [[False, True, True, True, False]]).all()
        current = grid
        for _ in range(10):
            current, changed = fuzzy_step(current, model)
            if changed == 0:
                break
        assert changed == 0
        assert (current.labels == [[0, fg.OBJECT, fg.OBJECT, fg.OBJECT, 0]]).all()

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_brute_force_bitwise(self, seed):
        rng = np.random.default_rng(100 + seed)
        c = np.round(rng.random((4, 4)) * 255) / 255
        seeds = object_seeds([(1, 1), (2, 2), (3, 1)])
        model = fg.fit_gaussian(seeds, alpha_x=2.0, alpha_y=2.0)
        grid = fg.init_fuzzy(c, seeds)
        mu_obj, mu_bkg = membership_grid(model, 4, 4)
        labels, theta = grid.labels, grid.strengths
        current = grid
        for _ in range(6):
            current, changed = fuzzy_step(current, model)
            labels, theta, ref_changed = brute_fuzzy_step(
                labels, theta, c, mu_obj, mu_bkg
            )
            assert changed == ref_changed
            assert (current.labels == labels).all()
            assert (current.strengths == theta).all()

    def test_pixel_visiting_order_irrelevant(self):
        rng = np.random.default_rng(7)
        c = rng.random((5, 5))
        seeds = object_seeds([(2, 2), (3, 1)])
        model = fg.fit_gaussian(seeds)
        mu_obj, mu_bkg = membership_grid(model, 5, 5)
        grid = fg.init_fuzzy(c, seeds)
        base = brute_fuzzy_step(grid.labels, grid.strengths, c, mu_obj, mu_bkg)
        pixels = [(y, x) for y in range(5) for x in range(5)]
        perm = [pixels[i] for i in rng.permutation(len(pixels))]
        shuffled = brute_fuzzy_step(grid.labels, grid.strengths, c, mu_obj,
                                    mu_bkg, pixel_order=perm)
        assert (base[0] == shuffled[0]).all()
        assert (base[1] == shuffled[1]).all()


class TestFuzzyRun:
    def test_background_seeds_rejected(self):
        image = np.full((8, 8), 0.5)
        seeds = fg.SeedSet.from_labeled([(1, 1, fg.OBJECT), (6, 6, fg.BACKGROUND)])
        with pytest.raises(ValueError, match="object seeds only"):
            fg.fuzzy_run(image, seeds)

    def test_ring_seeds_segment_disk(self):
        spec, image, truth = make_disk_phantom(r=20.0)
        seeds = ring_seeds(spec.cx, spec.cy, 0.85 * 20.0)
        result = fg.fuzzy_run(image, seeds)  # default alpha = 2.0
        assert result.converged
        assert fg.dice(result.mask, truth) >= 0.90

    def test_quarter_displaced_seeds_still_segment(self):
        spec, image, truth = make_disk_phantom(r=20.0)
        seeds = fg.SeedSet.from_points(ring_seeds(spec.cx, spec.cy, 0.85 * 20.0))
        rng = np.random.default_rng(42)
        faulty = displace_outside(seeds, spec, 0.25, rng)
        result = fg.fuzzy_run(image, faulty)
        assert fg.dice(result.mask, truth) >= 0.85

    def test_center_cell_stays_object(self):
        spec, image, truth = make_disk_phantom(r=16.0, size=64, sigma=0.03)
        seeds = ring_seeds(spec.cx, spec.cy, 12.0)
        result = fg.fuzzy_run(image, seeds)
        cx, cy = center_cell(image, fg.SeedSet.from_points(seeds))
        assert result.mask.values[cy, cx]

    def test_strengths_bounded_every_iteration(self):
        spec, image, _ = make_disk_phantom(r=12.0, size=48, sigma=0.05)
        seeds = fg.SeedSet.from_points(ring_seeds(spec.cx, spec.cy, 9.0))
        model = fg.fit_gaussian(seeds)
        grid = fg.init_fuzzy(image, seeds)
        for _ in range(50):
            grid, changed = fuzzy_step(grid, model)
            assert grid.strengths.min() >= 0.0
            assert grid.strengths.max() <= 1.0
            if changed == 0:
                break

    def test_mask_confined_to_model_support(self):
        # pixels with mu_bkg > mu_obj can never turn Object
        spec, image, _ = make_disk_phantom(r=14.0, size=64, sigma=0.05)
        seeds = fg.SeedSet.from_points(ring_seeds(spec.cx, spec.cy, 10.0))
        result = fg.fuzzy_run(image, seeds)
        mu_obj, mu_bkg = membership_grid(result.model, 64, 64)
        assert not (result.mask.values & (mu_bkg > mu_obj)).any()

    def test_model_echoed_in_result(self):
        spec, image, _ = make_disk_phantom(r=10.0, size=48)
        result = fg.fuzzy_run(image, ring_seeds(spec.cx, spec.cy, 8.0))
        assert result.model is not None
        assert result.model.alpha_x == 2.0

    def test_plain_point_list_accepted(self):
        image = np.full((8, 8), 0.5)
        result = fg.fuzzy_run(image, [(3, 3), (4, 4)])
        assert result.converged
