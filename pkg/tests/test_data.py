"""Generators, the Dataset container, noise families, and CSV round trips."""

import numpy as np
import pytest

from sigmalearn import (ConfigurationError, CsvParseError, CsvSchema, Dataset,
                        GeneratorConfig, NoiseSpec, SchemaError, generate,
                        read_csv, sample_noise, write_csv)


class TestNoiseSpec:
    def test_unknown_distribution_rejected(self):
        with pytest.raises(ConfigurationError):
            NoiseSpec(distribution="poisson")

    def test_negative_scale_rejected(self):
        with pytest.raises(ConfigurationError):
            NoiseSpec(scale=-1.0)

    @pytest.mark.parametrize("dist", ["gaussian", "uniform", "exponential"])
    def test_moment_matching(self, dist):
        draws = sample_noise(NoiseSpec(distribution=dist, location=3.0,
                                       scale=0.5), 200_000, seed=1)
        assert draws.mean() == pytest.approx(3.0, abs=0.01)
        assert draws.std() == pytest.approx(0.5, abs=0.01)

    def test_sample_noise_deterministic(self):
        spec = NoiseSpec(distribution="cauchy", location=1.0, scale=2.0)
        a = sample_noise(spec, 100, seed=7)
        b = sample_noise(spec, 100, seed=7)
        np.testing.assert_array_equal(a, b)

    def test_sample_noise_needs_positive_n(self):
        with pytest.raises(ConfigurationError):
            sample_noise(NoiseSpec(), 0, seed=0)

    def test_exponential_zero_scale_is_constant(self):
        draws = sample_noise(NoiseSpec(distribution="exponential",
                                       location=2.0, scale=0.0), 10, seed=0)
        np.testing.assert_array_equal(draws, np.full(10, 2.0))


class TestGeneratorConfig:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigurationError):
            GeneratorConfig(target_kind="quadratic")

    def test_too_few_points_rejected(self):
        with pytest.raises(ConfigurationError):
            GeneratorConfig(n_points=1)

    def test_negative_b_rejected(self):
        with pytest.raises(ConfigurationError):
            GeneratorConfig(b=-0.1, target_kind="cos2_combined")

    def test_nonpositive_periods_rejected(self):
        with pytest.raises(ConfigurationError):
            GeneratorConfig(periods=0.0, target_kind="cos2_mediated")

    def test_inverted_range_rejected(self):
        with pytest.raises(ConfigurationError):
            GeneratorConfig(x_min=2.0, x_max=1.0)

    def test_default_ranges(self):
        assert GeneratorConfig(target_kind="white_noise").resolved_range() == (0.0, 1.0)
        assert GeneratorConfig(target_kind="linear_plus_noise").resolved_range() == (0.0, 10.0)
        assert GeneratorConfig(target_kind="cos2_mediated",
                               periods=3).resolved_range() == (-3.0, 0.5)


class TestGenerate:
    def test_white_noise_shape_and_moments(self):
        ds = generate(GeneratorConfig(n_points=5000, target_kind="white_noise",
                                      noise=NoiseSpec(scale=1.0), seed=0))
        assert ds.n_rows == 5000 and ds.n_features == 1
        assert ds.z is None
        assert ds.y.std() == pytest.approx(1.0, abs=0.05)

    def test_linear_plus_noise_tracks_x(self):
        ds = generate(GeneratorConfig(n_points=1000,
                                      target_kind="linear_plus_noise",
                                      noise=NoiseSpec(scale=0.1), seed=0))
        np.testing.assert_allclose(ds.y, ds.x[:, 0], atol=0.6)

    def test_cos2_mediated_targets(self):
        ds = generate(GeneratorConfig(n_points=300, target_kind="cos2_mediated",
                                      periods=1, seed=0))
        np.testing.assert_allclose(ds.z, np.cos(np.pi * ds.x[:, 0]) ** 2)
        np.testing.assert_array_equal(ds.y, ds.z)
        np.testing.assert_array_equal(ds.z_mask, ds.x[:, 0] <= 0.0)

    def test_cos2_sigma_encoded_amplitude(self):
        ds = generate(GeneratorConfig(n_points=20000,
                                      target_kind="cos2_sigma_encoded",
                                      periods=1, seed=0))
        # Y has mean ~0 and |Z|-proportional spread.
        assert abs(ds.y.mean()) < 0.02
        strong = np.abs(ds.z) > 0.9
        weak = np.abs(ds.z) < 0.1
        assert ds.y[strong].std() > 5 * ds.y[weak].std()

    def test_cos2_combined_reduces_to_mediated_at_b0(self):
        cfg = GeneratorConfig(n_points=200, target_kind="cos2_combined",
                              periods=1, seed=3, b=0.0)
        ds = generate(cfg)
        np.testing.assert_array_equal(ds.y, ds.z)

    def test_bit_reproducible(self):
        cfg = GeneratorConfig(n_points=100, target_kind="cos2_combined",
                              periods=2, seed=11, b=0.5)
        a, b = generate(cfg), generate(cfg)
        np.testing.assert_array_equal(a.y, b.y)
        np.testing.assert_array_equal(a.x, b.x)

    def test_grid_is_even(self):
        ds = generate(GeneratorConfig(n_points=50, target_kind="linear_plus_noise"))
        steps = np.diff(ds.x[:, 0])
        np.testing.assert_allclose(steps, steps[0])


class TestDataset:
    def test_1d_x_promoted_to_column(self):
        ds = Dataset(x=np.arange(4.0))
        assert ds.x.shape == (4, 1)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigurationError):
            Dataset(x=np.arange(4.0), y=np.arange(3.0))

    def test_mask_without_z_rejected(self):
        with pytest.raises(ConfigurationError):
            Dataset(x=np.arange(4.0), z_mask=np.ones(4, dtype=bool))

    def test_default_mask_is_all_true(self):
        ds = Dataset(x=np.arange(4.0), z=np.arange(4.0))
        assert ds.z_mask.all()

    def test_non_finite_unmasked_z_rejected(self):
        with pytest.raises(ConfigurationError):
            Dataset(x=np.arange(3.0), z=np.array([0.0, np.nan, 2.0]))

    def test_non_finite_masked_z_allowed(self):
        ds = Dataset(x=np.arange(3.0), z=np.array([0.0, np.nan, 2.0]),
                     z_mask=np.array([True, False, True]))
        assert ds.n_rows == 3

    def test_subset_and_with_mask(self):
        ds = Dataset(x=np.arange(6.0), y=np.arange(6.0) * 2,
                     z=np.arange(6.0) * 3)
        sub = ds.subset(np.array([1, 3]))
        np.testing.assert_array_equal(sub.x[:, 0], [1.0, 3.0])
        np.testing.assert_array_equal(sub.y, [2.0, 6.0])
        remasked = ds.with_mask(np.arange(6) % 2 == 0)
        assert remasked.z_mask.sum() == 3


class TestCsv:
    def test_round_trip_identity(self, tmp_path):
        ds = generate(GeneratorConfig(n_points=200, target_kind="cos2_combined",
                                      periods=1.5, seed=5, b=0.7))
        path = tmp_path / "d.csv"
        write_csv(ds, path)
        back = read_csv(path)
        np.testing.assert_array_equal(back.x, ds.x)
        np.testing.assert_array_equal(back.y, ds.y)
        np.testing.assert_array_equal(back.z, ds.z)
        np.testing.assert_array_equal(back.z_mask, ds.z_mask)

    def test_round_trip_x_only(self, tmp_path):
        ds = Dataset(x=np.linspace(0, 1, 10), y=np.linspace(2, 3, 10))
        path = tmp_path / "d.csv"
        write_csv(ds, path)
        back = read_csv(path)
        np.testing.assert_array_equal(back.x, ds.x)
        assert back.z is None

    def test_multi_feature_autodetect(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x0,x1,y\n1,2,3\n4,5,6\n")
        ds = read_csv(path)
        assert ds.n_features == 2
        np.testing.assert_array_equal(ds.x, [[1.0, 2.0], [4.0, 5.0]])

    def test_blank_z_cell_masks_row(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y,z\n0,1,5\n1,2,\n")
        ds = read_csv(path)
        np.testing.assert_array_equal(ds.z_mask, [True, False])
        assert ds.z[0] == 5.0

    def test_custom_schema(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("temp,eps\n300,4.2\n400,4.7\n")
        ds = read_csv(path, schema=CsvSchema(x=("temp",), y="eps", z=None,
                                             z_mask=None))
        np.testing.assert_array_equal(ds.x[:, 0], [300.0, 400.0])
        np.testing.assert_array_equal(ds.y, [4.2, 4.7])

    def test_missing_feature_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(SchemaError):
            read_csv(path)

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y\n1,two\n")
        with pytest.raises(CsvParseError):
            read_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("")
        with pytest.raises(SchemaError):
            read_csv(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y\n")
        with pytest.raises(SchemaError):
            read_csv(path)

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y\n1,2\n\n3,4\n")
        assert read_csv(path).n_rows == 2
