import numpy as np
import pytest

from cpe.errors import DataError
from cpe.views import (
    CropSpec,
    ViewSet,
    activation_stats,
    build_view_set,
    generate_crop_specs,
    mean_activation,
    select_views,
)


class TestCropSpec:
    def test_json_round_trip(self):
        spec = CropSpec(0.1, 0.2, 0.3, 0.4, True, seed_index=7)
        again = CropSpec.from_json(spec.to_json(), seed_index=7)
        assert again == spec

    def test_rejects_nonpositive_extent(self):
        with pytest.raises(DataError):
            CropSpec(0.0, 0.0, 0.0, 0.5, False)

    def test_rejects_leaving_unit_square(self):
        with pytest.raises(DataError):
            CropSpec(0.8, 0.0, 0.3, 0.5, False)

    def test_from_json_wrong_arity(self):
        with pytest.raises(DataError):
            CropSpec.from_json([0.1, 0.1, 0.5])


class TestGenerateCropSpecs:
    def test_same_seed_same_specs(self):
        assert generate_crop_specs(11, 20) == generate_crop_specs(11, 20)

    def test_different_seeds_differ(self):
        a = generate_crop_specs(1, 20)
        b = generate_crop_specs(2, 20)
        assert any(x != y for x, y in zip(a, b))

    def test_prefix_is_stable_under_larger_n(self):
        """Spec i depends only on (seed, i), never on how many are requested."""
        assert generate_crop_specs(5, 100)[:10] == generate_crop_specs(5, 10)

    def test_rectangles_stay_valid_over_many_draws(self):
        specs = generate_crop_specs(3, 10_000, scale=(0.2, 1.0))
        for spec in specs:
            assert spec.w > 0.0 and spec.h > 0.0
            assert spec.x0 >= 0.0 and spec.y0 >= 0.0
            assert spec.x0 + spec.w <= 1.0 + 1e-12
            assert spec.y0 + spec.h <= 1.0 + 1e-12
            assert spec.w * spec.h <= 1.0 + 1e-12

    def test_seed_index_records_position(self):
        specs = generate_crop_specs(9, 5)
        assert [s.seed_index for s in specs] == [0, 1, 2, 3, 4]

    def test_flip_rate_is_roughly_half(self):
        specs = generate_crop_specs(4, 4000)
        rate = sum(s.hflip for s in specs) / len(specs)
        assert 0.45 < rate < 0.55

    def test_scale_bounds_respected_before_clipping(self):
        # at scale hi = lo the drawn area is fixed; the realized area can only
        # shrink from unit-square clipping
        specs = generate_crop_specs(6, 500, scale=(0.25, 0.25))
        for spec in specs:
            assert spec.w * spec.h <= 0.25 + 1e-12

    def test_rejects_bad_arguments(self):
        with pytest.raises(DataError):
            generate_crop_specs(0, 0)
        with pytest.raises(DataError):
            generate_crop_specs(0, 5, scale=(0.0, 1.0))
        with pytest.raises(DataError):
            generate_crop_specs(0, 5, scale=(0.8, 0.2))


class TestMeanActivation:
    def single_hot(self):
        return np.array([[1.0, 0.0], [0.0, 0.0]])

    def test_left_half_of_two_by_two(self):
        spec = CropSpec(0.0, 0.0, 0.5, 1.0, False)
        assert mean_activation(self.single_hot(), spec) == 0.5

    def test_full_rectangle(self):
        spec = CropSpec(0.0, 0.0, 1.0, 1.0, False)
        assert mean_activation(self.single_hot(), spec) == 0.25

    def test_quadrants(self):
        top_left = CropSpec(0.0, 0.0, 0.5, 0.5, False)
        bottom_right = CropSpec(0.5, 0.5, 0.5, 0.5, False)
        assert mean_activation(self.single_hot(), top_left) == 1.0
        assert mean_activation(self.single_hot(), bottom_right) == 0.0

    def test_subpixel_crop_floors_to_one_pixel(self):
        spec = CropSpec(0.0, 0.0, 0.1, 0.1, False)
        assert mean_activation(self.single_hot(), spec) == 1.0

    def test_flip_flag_does_not_change_the_mean(self):
        att = np.arange(12.0).reshape(3, 4)
        spec_a = CropSpec(0.25, 0.0, 0.5, 0.7, False)
        spec_b = CropSpec(0.25, 0.0, 0.5, 0.7, True)
        assert mean_activation(att, spec_a) == mean_activation(att, spec_b)

    def test_uniform_map_gives_the_constant(self):
        att = np.full((7, 5), 0.3)
        rng = np.random.default_rng(12)
        for _ in range(20):
            w = rng.uniform(0.05, 1.0)
            h = rng.uniform(0.05, 1.0)
            spec = CropSpec(rng.uniform(0, 1 - w), rng.uniform(0, 1 - h), w, h, False)
            np.testing.assert_allclose(mean_activation(att, spec), 0.3, rtol=1e-12)

    def test_four_by_four_hand_case(self):
        att = np.zeros((4, 4))
        att[1, 1] = 8.0
        att[1, 2] = 4.0
        # central half covers pixel columns 1..3, rows 1..3
        spec = CropSpec(0.25, 0.25, 0.5, 0.5, False)
        assert mean_activation(att, spec) == 3.0


class TestSelection:
    def test_nine_high_one_low(self):
        """One dead crop among nine live ones falls below mu - 2*sigma."""
        acts = [0.5] * 9 + [0.0]
        stats = activation_stats(acts)
        np.testing.assert_allclose(stats.mu, 0.45)
        np.testing.assert_allclose(stats.sigma, 0.15)
        np.testing.assert_allclose(stats.threshold, 0.15)
        assert select_views(acts).tolist() == [1, 2, 3, 4, 5, 6, 7, 8, 9]

    def test_constant_activations_keep_everything(self):
        acts = [0.2] * 6
        assert select_views(acts).tolist() == [1, 2, 3, 4, 5, 6]

    def test_population_sigma_not_sample(self):
        stats = activation_stats([0.0, 1.0])
        np.testing.assert_allclose(stats.sigma, 0.5)  # sample form would give 0.7071

    def test_gaussian_tail_fraction(self):
        """On normal draws about 2.3 percent fall below mu - 2*sigma."""
        rng = np.random.default_rng(17)
        acts = rng.normal(size=10_000)
        kept = select_views(acts)
        removed_fraction = 1.0 - len(kept) / 10_000
        assert 0.0178 <= removed_fraction <= 0.0278

    def test_matches_direct_threshold_recomputation(self):
        rng = np.random.default_rng(18)
        for _ in range(25):
            acts = rng.normal(size=int(rng.integers(2, 200)))
            mu = acts.mean()
            sigma = acts.std()
            expect = np.nonzero(acts > mu - 2 * sigma)[0] + 1
            assert select_views(acts).tolist() == expect.tolist()

    def test_indices_are_one_based_and_increasing(self):
        rng = np.random.default_rng(19)
        acts = rng.normal(size=50)
        kept = select_views(acts)
        assert kept.min() >= 1
        assert np.all(np.diff(kept) > 0)


class TestBuildViewSet:
    def test_rows_follow_retained_order(self):
        full = np.array([1.0, 0.0, 0.0])
        crops = np.eye(3)[::-1]
        vs = build_view_set(full, crops, [1, 3])
        assert vs.size == 3
        np.testing.assert_array_equal(vs.embeddings[0], full)
        np.testing.assert_array_equal(vs.embeddings[1], crops[0])
        np.testing.assert_array_equal(vs.embeddings[2], crops[2])
        assert vs.retained_indices.tolist() == [1, 3]

    def test_empty_retained_keeps_only_full_image(self):
        vs = build_view_set(np.array([0.0, 1.0]), np.eye(2), [])
        assert vs.size == 1

    def test_out_of_range_crop_number(self):
        with pytest.raises(DataError):
            build_view_set(np.array([0.0, 1.0]), np.eye(2), [3])
        with pytest.raises(DataError):
            build_view_set(np.array([0.0, 1.0]), np.eye(2), [0])

    def test_view_set_row_count_must_match(self):
        with pytest.raises(DataError):
            ViewSet(np.eye(3), np.array([1]))

    def test_view_set_indices_must_increase(self):
        with pytest.raises(DataError):
            ViewSet(np.eye(3), np.array([2, 2]))
