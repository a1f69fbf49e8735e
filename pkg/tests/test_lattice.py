import numpy as np
import pytest

from diploid_vortex.core.lattice import TruncatedLattice, lattice_size, level_size
from diploid_vortex.exceptions import LatticeTooSmallError, TableRangeError
from diploid_vortex.types.enums import Region
from diploid_vortex.types.models import PopulationState


def test_size_counts_every_state():
    lattice = TruncatedLattice(6)

    assert len(lattice) == lattice_size(6) == sum(level_size(n) for n in range(2, 7))
    assert level_size(2) == 6
    assert np.all(lattice.k + lattice.m + lattice.n == lattice.N)
    assert np.all(np.diff(lattice.N) >= 0)


def test_index_is_a_bijection():
    lattice = TruncatedLattice(9)
    indices = lattice.index_array(lattice.k, lattice.m, lattice.n)

    assert np.array_equal(indices, np.arange(len(lattice)))
    state = PopulationState(k=3, m=2, n=1)
    assert lattice.state(lattice.index_of(state)) == state


def test_level_slice_holds_one_size():
    lattice = TruncatedLattice(8)
    block = lattice.level_slice(5)

    assert np.all(lattice.N[block] == 5)
    assert block.stop - block.start == level_size(5)
    assert lattice.offset(5) == block.start


def test_boundaries():
    lattice = TruncatedLattice(5)

    assert lattice.region(lattice.index(4, 0, 0)) == Region.LOST
    assert lattice.region(lattice.index(0, 0, 4)) == Region.FIXED
    assert lattice.region(lattice.index(1, 2, 1)) == Region.INTERIOR
    # one of each absorbing state per level
    assert lattice.gamma_lost.sum() == lattice.gamma_fixed.sum() == 4


def test_out_of_range_queries():
    lattice = TruncatedLattice(5)

    with pytest.raises(TableRangeError):
        lattice.index(3, 2, 1)
    with pytest.raises(TableRangeError):
        lattice.level_slice(6)
    with pytest.raises(LatticeTooSmallError):
        TruncatedLattice(3)
