"""Tests for DGFF sampling, smeared fields and the mollifier."""

from pathlib import Path

import numpy as np
import pytest
from scipy.spatial import distance_matrix

from percolated_gff.cluster import ClusterGeometry, largest_cluster
from percolated_gff.domain import ScaledDomain
from percolated_gff.environment import parse_law, sample_environment
from percolated_gff.errors import ConfigError, ProvenanceError, SupportError
from percolated_gff.field import (
    FieldProvenance,
    FieldSample,
    load_fields,
    sample_dgff,
    save_fields,
)
from percolated_gff.green import GreenOperator, build_killed_operator
from percolated_gff.mollifier import MollifierSpec
from percolated_gff.smeared import (
    increment_moment,
    smear_field,
    smear_fields,
    smeared_kernels,
    smeared_variance,
    smoothing_matrix,
)
from percolated_gff.wick import cell_centers

POINTS = np.array([[0.4, 0.4], [0.6, 0.5], [0.5, 0.7]])


class TestSampleDgff:
    """Test exact DGFF sampling."""

    def test_load_on_other_domain(
        self, green12: GreenOperator, full_geom: ClusterGeometry, tmp_path: Path
    ) -> None:
        """Test that fields refuse to attach to another domain."""
        path = save_fields(sample_dgff(green12.op, 2), tmp_path / "fields")
        other = build_killed_operator(full_geom, ScaledDomain(10))
        with pytest.raises(ProvenanceError):
            load_fields(path, other)

    def test_off_domain_is_zero(self, green12: GreenOperator) -> None:
        """Test that sites off the domain carry the value zero."""
        field = sample_dgff(green12.op, 1, seed=3)[0]
        values = field.value_at(np.array([[9, 9], [0, 0]]))
        assert values[0] == 0.0
        assert values[1] != 0.0

    def test_replica_addressable(self, green12: GreenOperator) -> None:
        """Test that replica 2 does not depend on how many replicas are drawn."""
        batch = sample_dgff(green12.op, 3, seed=5)
        alone = sample_dgff(green12.op, 1, seed=5, first=2)[0]
        assert np.array_equal(batch[2].values, alone.values)
        assert alone.provenance.replica == 2

    def test_save_and_load(self, green12: GreenOperator, tmp_path: Path) -> None:
        """Test the array file with its provenance sidecar."""
        fields = sample_dgff(green12.op, 4, seed=1)
        path = save_fields(fields, tmp_path / "fields")
        loaded = load_fields(path, green12.op)
        assert [f.provenance for f in loaded] == [f.provenance for f in fields]
        assert np.array_equal(loaded[3].values, fields[3].values)

    def test_save_nothing(self, tmp_path: Path) -> None:
        """Test that an empty replica list cannot be saved."""
        with pytest.raises(ProvenanceError):
            save_fields([], tmp_path / "fields")

    def test_single_site_variance(self, full_geom: ClusterGeometry) -> None:
        """Test that the field on {0} is Normal(0, 1/4)."""
        op = build_killed_operator(full_geom, [[0, 0]])
        values = np.array([f.values[0] for f in sample_dgff(op, 4000, seed=0)])
        stderr = 0.25 * np.sqrt(2.0 / len(values))
        assert abs(values.var(ddof=1) - 0.25) < 4 * stderr
        assert abs(values.mean()) < 4 * 0.5 / np.sqrt(len(values))


class TestSmearedField:
    """Test smearing and the smeared Green's kernels."""

    def test_constant_field(self) -> None:
        """Test that smearing the constant field 1 integrates the mollifier."""
        geom = largest_cluster(sample_environment(parse_law("bernoulli:p=1"), 2, 39))
        op = build_killed_operator(geom, ScaledDomain(64))
        field = FieldSample(np.ones(op.size), op, FieldProvenance(0, "", 64, 0))
        value = smear_field(field, MollifierSpec(0.4), [0.5, 0.5])
        assert value == pytest.approx(1.0, abs=1e-4)

    def test_empirical_variance(self, green12: GreenOperator) -> None:
        """Test the smeared variance against sampled replicas."""
        mollifier = MollifierSpec(0.25)
        fields = sample_dgff(green12.op, 2000, seed=6)
        values = smear_fields(fields, mollifier, POINTS[:1])[:, 0]
        target = smeared_variance(green12, mollifier, POINTS[0])
        assert abs(values.var(ddof=1) - target) < 4 * target * np.sqrt(2.0 / len(values))

    def test_increment_moment(self, green12: GreenOperator) -> None:
        """Test the Gaussian moment (2k-1)!! v^k of an increment."""
        mollifier = MollifierSpec(0.2)
        kernels = smeared_kernels(green12, mollifier, POINTS[:2])
        v = kernels.gee[0, 0] + kernels.gee[1, 1] - 2 * kernels.gee[0, 1]
        x, y = POINTS[0], POINTS[1]
        assert increment_moment(green12, mollifier, x, y, 1) == pytest.approx(v)
        assert increment_moment(green12, mollifier, x, y, 2) == pytest.approx(3 * v * v)
        with pytest.raises(ConfigError):
            increment_moment(green12, mollifier, x, y, 0)

    def test_kernel_set(self, green12: GreenOperator, tmp_path: Path) -> None:
        """Test symmetry of g^{eps,eps}, the unsmeared entries and the CSV rows."""
        mollifier = MollifierSpec(0.2)
        kernels = smeared_kernels(green12, mollifier, POINTS)
        assert np.array_equal(kernels.gee, kernels.gee.T)
        assert kernels.gee[1, 1] == pytest.approx(smeared_variance(green12, mollifier, POINTS[1]))
        sites = ScaledDomain(12).site_of(POINTS)
        assert kernels.g[0, 1] == pytest.approx(green12.entry(sites[0], sites[1]))
        lines = kernels.to_csv(tmp_path / "k.csv").read_text().splitlines()
        assert len(lines) == 1 + len(POINTS) ** 2

    def test_off_diagonal_bound(self, green12: GreenOperator) -> None:
        """Test that separated smeared kernels stay below the separated lattice kernel."""
        mollifier = MollifierSpec(0.1)
        gee = smeared_kernels(green12, mollifier, POINTS).gee
        mass = np.asarray(smoothing_matrix(green12.op, mollifier, POINTS).sum(axis=1)).ravel()
        centres = cell_centers(green12.op)
        distance = distance_matrix(centres, centres)
        for i, j in ((0, 1), (0, 2), (1, 2)):
            reach = np.linalg.norm(POINTS[i] - POINTS[j]) - 2 * mollifier.epsilon
            bound = green12.kernel[distance > reach].max() * mass[i] * mass[j]
            assert gee[i, j] <= bound + 1e-12

    def test_support_leaves_cube(self, green12: GreenOperator) -> None:
        """Test that a mollifier poking out of the cube is rejected."""
        field = sample_dgff(green12.op, 1)[0]
        with pytest.raises(SupportError):
            smear_field(field, MollifierSpec(0.2), [0.1, 0.5])

    def test_zero_field(self, green12: GreenOperator) -> None:
        """Test that the zero field smears to zero."""
        field = FieldSample(np.zeros(green12.op.size), green12.op, FieldProvenance(0, "", 12, 0))
        assert smear_field(field, MollifierSpec(0.3), [0.5, 0.5]) == 0.0


class TestMollifier:
    """Test the bump mollifier."""

    def test_density_vanishes_outside(self) -> None:
        """Test that the density is zero outside its support."""
        mollifier = MollifierSpec(0.2)
        points = np.array([[0.5, 0.5], [0.75, 0.5], [0.5, 0.71]])
        values = mollifier.density(np.array([0.5, 0.5]), points)
        assert values[0] > 0
        assert np.array_equal(values[1:], [0.0, 0.0])

    def test_invalid_radius(self) -> None:
        """Test that the radius must lie in (0, 1)."""
        with pytest.raises(ConfigError):
            MollifierSpec(1.0)

    def test_quadrature_normalised(self) -> None:
        """Test that the Gauss-Legendre weights integrate the density to one."""
        _, weights = MollifierSpec(0.3).quadrature(np.array([0.5, 0.5]))
        assert weights.sum() == pytest.approx(1.0, abs=1e-4)

    def test_riemann_weights_normalised(self) -> None:
        """Test that the grid weights integrate the density to one."""
        cells, weights = MollifierSpec(0.3).riemann_weights(np.array([0.5, 0.5]), 200)
        assert weights.sum() == pytest.approx(1.0, abs=1e-5)
        assert np.all((cells >= 0) & (cells < 200))
