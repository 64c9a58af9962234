import math

import numpy as np
import pytest

from quadfun import (
    DataFormatError,
    DomainError,
    EstimationError,
    SampleSet,
    basis_eval,
    empirical_cf,
    lattice_ball,
    load_samples_csv,
    make_trig_density,
    sample,
)
from quadfun.errors import DimensionError
from quadfun.spectral import SpectralProfile


class TestBasisEval:
    def test_constant_element(self):
        assert basis_eval((0,), 0.7) == 1.0
        assert basis_eval((0, 0), (0.3, 0.9)) == 1.0

    def test_quarter_turn(self):
        val = basis_eval((1,), 0.25)
        assert val == pytest.approx(1j, abs=1e-15)

    def test_full_turn(self):
        val = basis_eval((1, 1), (0.5, 0.5))
        assert val == pytest.approx(1.0, abs=1e-15)

    def test_unit_modulus(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            z = tuple(int(c) for c in rng.integers(-6, 7, size=2))
            x = tuple(rng.random(2))
            assert abs(basis_eval(z, x)) == pytest.approx(1.0, abs=1e-12)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            basis_eval((1,), 1.0)
        with pytest.raises(DomainError):
            basis_eval((1,), -0.1)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            basis_eval((1, 2), 0.5)


class TestEmpiricalCf:
    def test_zero_frequency_is_exactly_one(self):
        samples = SampleSet(1, np.array([[0.13], [0.57], [0.99]]))
        Z = lattice_ball(1, 1, "all")
        cf = empirical_cf(samples, Z)
        assert cf[(0,)] == 1.0

    def test_cancellation(self):
        samples = SampleSet(1, np.array([[0.0], [0.5]]))
        Z = lattice_ball(1, 1, "exclude_origin")
        cf = empirical_cf(samples, Z)
        assert cf[(1,)] == pytest.approx(0.0, abs=1e-15)

    def test_two_point_value(self):
        # independent complex-arithmetic oracle: (1 + exp(-2*pi*i/3)) / 2
        samples = SampleSet(1, np.array([[0.0], [1.0 / 3.0]]))
        Z = lattice_ball(1, 1, "exclude_origin")
        cf = empirical_cf(samples, Z)
        from cmath import exp, pi

        expected = (1 + exp(-2j * pi / 3)) / 2
        assert cf[(1,)] == pytest.approx(expected, abs=1e-15)
        assert cf[(1,)] == pytest.approx(0.25 - 0.433013j, abs=1e-6)

    def test_modulus_at_most_one(self):
        rng = np.random.default_rng(5)
        samples = SampleSet(2, rng.random((200, 2)))
        cf = empirical_cf(samples, lattice_ball(3, 2, "all"))
        assert all(abs(v) <= 1.0 + 1e-12 for v in cf.coefficients.values())

    def test_hermitian_symmetry(self):
        rng = np.random.default_rng(9)
        samples = SampleSet(2, rng.random((64, 2)))
        cf = empirical_cf(samples, lattice_ball(2, 2, "all"))
        for z, value in cf.coefficients.items():
            neg = tuple(-c for c in z)
            assert abs(cf[neg] - value.conjugate()) <= 1e-14

    def test_provenance_and_errors(self):
        samples = SampleSet(1, np.array([[0.2]]))
        cf = empirical_cf(samples, lattice_ball(1, 1, "all"))
        assert cf.provenance == ("empirical", 1)
        with pytest.raises(EstimationError):
            empirical_cf(SampleSet(1, np.empty((0, 1))), lattice_ball(1, 1, "all"))
        with pytest.raises(DimensionError):
            empirical_cf(samples, lattice_ball(1, 2, "all"))

    def test_consistency_against_exact_spectrum(self):
        """RMS deviation of the plug-in coefficients stays within 3/sqrt(n)."""
        density = make_trig_density({1: 1 / math.sqrt(2)})
        n, reps = 10_000, 200
        Z = lattice_ball(2, 1, "exclude_origin")
        exact = {z: density.coefficient(z) for z in Z.members}
        sq_devs = []
        for rep in range(reps):
            xs = sample(density, n, seed=1000 + rep)
            cf = empirical_cf(xs, Z)
            sq_devs.extend(abs(cf[z] - exact[z]) ** 2 for z in Z.members)
        rms = math.sqrt(sum(sq_devs) / len(sq_devs))
        assert rms <= 3.0 / math.sqrt(n)


class TestSpectralProfileInvariants:
    def test_rejects_bad_zero_coefficient(self):
        with pytest.raises(ValueError):
            SpectralProfile({(0,): 0.5 + 0j})

    def test_rejects_hermitian_violation(self):
        with pytest.raises(ValueError):
            SpectralProfile({(1,): 0.5 + 0.5j, (-1,): 0.5 + 0.5j})


class TestSampleSet:
    def test_range_validation(self):
        with pytest.raises(DomainError):
            SampleSet(1, np.array([[1.0]]))
        with pytest.raises(DomainError):
            SampleSet(1, np.array([[-0.2]]))

    def test_points_are_read_only(self):
        s = SampleSet(1, np.array([[0.5]]))
        with pytest.raises(ValueError):
            s.points[0, 0] = 0.1


class TestCsvIngestion:
    def test_load(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("0.1,0.2\n0.3,0.4\n")
        s = load_samples_csv(str(path))
        assert s.dimension == 2
        assert len(s) == 2

    def test_bad_coordinate_reports_line(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("0.1\n0.5\n1.5\n")
        with pytest.raises(DataFormatError, match="line 3"):
            load_samples_csv(str(path))

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("0.1,0.2\n0.3\n")
        with pytest.raises(DataFormatError, match="line 2"):
            load_samples_csv(str(path))

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("0.1\nfoo\n")
        with pytest.raises(DataFormatError, match="line 2"):
            load_samples_csv(str(path))

    def test_empty_file(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("")
        with pytest.raises(DataFormatError):
            load_samples_csv(str(path))
