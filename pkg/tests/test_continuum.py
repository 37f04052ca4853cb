"""Tests for the continuum eigenbasis and the continuum Gaussian free field."""

import math

import numpy as np
import pytest

from percolated_gff.continuum import (
    continuum_basis,
    continuum_cross_covariance,
    continuum_smeared_covariance,
    sample_cgff,
    sample_cgff_modes,
)
from percolated_gff.errors import ConfigError, SupportError
from percolated_gff.mollifier import MollifierSpec

POINTS = np.array([[0.4, 0.4], [0.6, 0.5]])


class TestContinuumBasis:
    """Test the Dirichlet eigenbasis."""

    def test_laplacian_eigenvalues(self) -> None:
        """Test that a = 2I gives the Laplacian with lambda_k = pi^2 |k|^2."""
        basis = continuum_basis(2.0 * np.eye(2), 6)
        assert basis.eigenvalues[0] == pytest.approx(2 * math.pi**2)
        expected = math.pi**2 * (basis.wavenumbers**2).sum(axis=1)
        assert np.allclose(basis.eigenvalues, expected)
        assert np.all(np.diff(basis.eigenvalues) >= 0)

    def test_log_coefficient(self) -> None:
        """Test c = 1 / (pi sqrt(det a))."""
        basis = continuum_basis(np.diag([1.0, 4.0]), 4)
        assert basis.log_coefficient == pytest.approx(1.0 / (2.0 * math.pi))

    def test_non_diagonal_rejected(self) -> None:
        """Test that a non-diagonal diffusivity is not supported."""
        with pytest.raises(ConfigError):
            continuum_basis([[2.0, 0.5], [0.5, 2.0]], 16)

    def test_not_positive_definite(self) -> None:
        """Test that a singular diffusivity is rejected."""
        with pytest.raises(ConfigError):
            continuum_basis(np.diag([1.0, 0.0]), 16)

    def test_orthonormal_modes(self) -> None:
        """Test that the sine modes are orthonormal on the unit square."""
        basis = continuum_basis(2.0 * np.eye(2), 5)
        axis = (np.arange(200) + 0.5) / 200
        grid = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
        values = basis.eigenfunctions(grid)
        gram = values.T @ values / len(grid)
        assert np.allclose(gram, np.eye(basis.modes), atol=1e-6)

    def test_truncation_stable(self) -> None:
        """Test that doubling the mode count moves g^Sigma by less than half a percent."""
        x, y = (0.3, 0.3), (0.7, 0.6)
        coarse = continuum_basis(2.0 * np.eye(2), 4096).green(x, y)
        fine = continuum_basis(2.0 * np.eye(2), 8192).green(x, y)
        assert abs(fine - coarse) < 0.005 * abs(fine)


class TestContinuumCovariances:
    """Test smeared continuum covariances and sampling."""

    def test_cross_approaches_smeared(self) -> None:
        """Test that both smeared kernels agree away from the diagonal for small eps."""
        basis = continuum_basis(2.0 * np.eye(2), 1024)
        mollifier = MollifierSpec(0.05)
        smeared = continuum_smeared_covariance(basis, mollifier, POINTS)
        cross = continuum_cross_covariance(basis, mollifier, POINTS)
        assert cross[0, 1] == pytest.approx(smeared[0, 1], rel=0.05)

    def test_modes_addressable(self) -> None:
        """Test that replica r of the modal amplitudes is independent of the batch."""
        basis = continuum_basis(2.0 * np.eye(2), 16)
        batch = sample_cgff_modes(basis, 3, seed=1)
        alone = sample_cgff_modes(basis, 1, seed=1, first=2)
        assert np.array_equal(batch[2], alone[0])

    def test_sampled_variance(self) -> None:
        """Test the sampled smeared CGFF variance."""
        basis = continuum_basis(2.0 * np.eye(2), 64)
        mollifier = MollifierSpec(0.2)
        values = sample_cgff(basis, mollifier, POINTS[:1], 4000, seed=2)[:, 0]
        target = continuum_smeared_covariance(basis, mollifier, POINTS[:1])[0, 0]
        assert abs(values.var(ddof=1) - target) < 4 * target * math.sqrt(2.0 / len(values))

    def test_smeared_positive_definite(self) -> None:
        """Test symmetry and positivity of the smeared covariance."""
        basis = continuum_basis(2.0 * np.eye(2), 256)
        covariance = continuum_smeared_covariance(basis, MollifierSpec(0.1), POINTS)
        assert np.array_equal(covariance, covariance.T)
        assert np.all(np.linalg.eigvalsh(covariance) > 0)

    def test_support_checked(self) -> None:
        """Test that a mollifier leaving the square is rejected."""
        basis = continuum_basis(2.0 * np.eye(2), 16)
        with pytest.raises(SupportError):
            continuum_smeared_covariance(basis, MollifierSpec(0.3), np.array([[0.2, 0.5]]))
