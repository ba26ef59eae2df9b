import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eprlab import bell

angles = st.floats(0, 2 * np.pi)


def test_sixteen_deterministic_strategies():
    values = bell.lhv_chsh_values()
    assert len(values) == 16
    assert sorted(set(values)) == [-2, 2]
    assert values.count(2) == 8
    assert bell.lhv_max_chsh() == 2


def test_tsirelson_at_standard_angles():
    assert abs(bell.quantum_chsh()) == pytest.approx(2 * np.sqrt(2), abs=1e-12)
    assert bell.quantum_chsh_max() == pytest.approx(2 * np.sqrt(2), abs=1e-12)


@given(a0=angles, a1=angles, b0=angles, b1=angles)
def test_singlet_never_beats_tsirelson(a0, a1, b0, b1):
    assert abs(bell.quantum_chsh((a0, a1), (b0, b1))) <= 2 * np.sqrt(2) + 1e-12


def test_singlet_anticorrelated_at_equal_angles():
    assert bell.qm_singlet_correlation(0.7, 0.7) == -1.0


def test_validation():
    with pytest.raises(ValueError):
        bell.LhvStrategy((1, 0), (1, 1))
    with pytest.raises(ValueError):
        bell.chsh_value(1.5, 0, 0, 0)


def test_table_shape():
    rows = bell.chsh_table()
    assert len(rows) == 17
    assert rows[-1]["source"] == "quantum"
