import io
from fractions import Fraction

import numpy as np
import pytest

from ensembles import (
    AtomDistribution,
    AtomKind,
    EnsembleSpec,
    atom_moments,
    derive_sample_seed,
    sample_matrix,
    write_matrix_csv,
)
from errors import DomainError, ShapeError


def test_sample_matrix_is_deterministic():
    spec = EnsembleSpec("complex-gaussian", 16, master_seed=7)
    a = sample_matrix(spec, 3).data
    b = sample_matrix(spec, 3).data
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_matrix(spec, 4).data)


def test_master_seed_changes_samples():
    a = sample_matrix(EnsembleSpec("real-gaussian", 8, 1), 0).data
    b = sample_matrix(EnsembleSpec("real-gaussian", 8, 2), 0).data
    assert not np.array_equal(a, b)


def test_derived_seeds_are_distinct():
    seeds = {derive_sample_seed(11, i) for i in range(10_000)}
    assert len(seeds) == 10_000


def test_real_kinds_produce_real_matrices():
    for kind in ("real-gaussian", "matched-discrete-real"):
        m = sample_matrix(EnsembleSpec(kind, 6), 0)
        assert m.is_real
    for kind in ("complex-gaussian", "matched-discrete-complex"):
        assert not sample_matrix(EnsembleSpec(kind, 6), 0).is_real


def test_three_point_atom_support():
    spec = EnsembleSpec("matched-discrete-real", 50)
    values = np.unique(np.round(sample_matrix(spec, 0).data * np.sqrt(50), 12))
    assert set(values.tolist()) <= {-round(np.sqrt(3.0), 12), 0.0, round(np.sqrt(3.0), 12)}


def test_entry_variance_is_one_over_dim():
    spec = EnsembleSpec("complex-gaussian", 200, master_seed=3)
    data = sample_matrix(spec, 0).data
    assert np.mean(np.abs(data) ** 2) * 200 == pytest.approx(1.0, abs=0.02)


def test_mismatched_variance_scales_entries():
    spec = EnsembleSpec(AtomDistribution(AtomKind.REAL_GAUSSIAN, variance=2.0), 200, master_seed=3)
    data = sample_matrix(spec, 0).data
    assert np.mean(data**2) * 200 == pytest.approx(2.0, abs=0.07)


def test_spec_validation():
    with pytest.raises(DomainError):
        EnsembleSpec("complex-gaussian", 1)
    with pytest.raises(DomainError):
        EnsembleSpec("complex-gaussian", 4, master_seed=-1)
    with pytest.raises(ValueError):
        EnsembleSpec("cauchy", 4)
    with pytest.raises(ShapeError):
        EnsembleSpec("real-gaussian", 5).require_even()


def test_real_moments_match_gaussian_to_four():
    gauss = atom_moments(AtomDistribution("real-gaussian"))
    discrete = atom_moments(AtomDistribution("matched-discrete-real"))
    assert gauss.values == discrete.values
    assert gauss[2] == 1 and gauss[4] == 3 and gauss[3] == 0


def test_complex_moments_match_gaussian_to_four():
    gauss = atom_moments(AtomDistribution("complex-gaussian"))
    discrete = atom_moments(AtomDistribution("matched-discrete-complex"))
    assert gauss.values == discrete.values
    assert gauss[(1, 1)] == 1
    assert gauss[(2, 0)] == 0
    assert gauss[(2, 2)] == 2


def test_moment_order_out_of_range():
    with pytest.raises(DomainError):
        atom_moments(AtomDistribution("real-gaussian"), order=5)


def test_moments_scale_with_variance():
    table = atom_moments(AtomDistribution("real-gaussian", variance=2.0))
    assert table[2] == Fraction(2)
    assert table[4] == Fraction(12)


def test_write_matrix_csv():
    out = io.StringIO()
    spec = EnsembleSpec("complex-gaussian", 2)
    rows = write_matrix_csv((sample_matrix(spec, i) for i in range(3)), out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "sample_index,i,j,re,im"
    assert rows == 12
    assert len(lines) == 13
    assert lines[-1].startswith("2,1,1,")
    first = sample_matrix(spec, 0).data
    assert float(lines[2].split(",")[3]) == first[0, 1].real


@pytest.mark.parametrize("kind", [k.value for k in AtomKind])
def test_leading_block_does_not_depend_on_dim(kind):
    small = sample_matrix(EnsembleSpec(kind, 4, master_seed=5), 2).data * 2.0
    large = sample_matrix(EnsembleSpec(kind, 6, master_seed=5), 2).data * np.sqrt(6.0)
    assert np.allclose(large[:4, :4], small)
    assert not np.allclose(large[:4, :4], sample_matrix(EnsembleSpec(kind, 4, master_seed=5), 3).data * 2.0)
