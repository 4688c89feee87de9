import pytest

from graph_radii import mdr, radii, utils, views
from graph_radii.formalisms import layers, spectral
from graph_radii.formalisms import radii as radii_formalisms


def test_derive_seed():
    assert utils.derive_seed(0, 1) == utils.derive_seed(0, 1)
    assert utils.derive_seed(0, 1) != utils.derive_seed(1, 0)
    assert 0 <= utils.derive_seed(5) < 2 ** 32


def test_atomic_write_text(tmp_path):
    path = utils.atomic_write_text(tmp_path / 'nested' / 'file.txt', 'first\n')
    utils.atomic_write_text(path, 'second\n')
    assert path.read_text() == 'second\n'
    assert [p.name for p in path.parent.iterdir()] == ['file.txt']


def test_is_almost_equal():
    assert utils.is_almost_equal(1., 1. + 1.e-8)
    assert not utils.is_almost_equal(1., 1.1)
    assert not utils.is_almost_equal([1., 2.], [1.])


def test_assert_trend():
    utils.assert_trend([1, 2, 2, 3], '+')
    utils.assert_trend([3, 1, 1], '-')
    utils.assert_trend([1, 3, 2], '+-')
    with pytest.raises(AssertionError):
        utils.assert_trend([1, 3, 2], '+')
    with pytest.raises(ValueError):
        utils.assert_trend([1], '?')


@pytest.mark.parametrize('function', [layers.relu, spectral.calc_retained_energy, views.retained_energy,
                                      radii_formalisms.calc_consensus, radii.consensus,
                                      radii.binary_deviation_radii, mdr.conformal_intervals])
def test_kernels_document_arguments_and_returns(function):
    assert 'Args:' in function.__doc__ and 'Returns:' in function.__doc__
