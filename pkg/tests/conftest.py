import numpy as np
import pytest

from vqh.quantum import StateVector, bit_index
from vqh.qubo import QuboProblem


@pytest.fixture
def three_qubit_state():
    """√(3/4)|100⟩ + √(3/16)|011⟩ + √(1/16)|101⟩."""
    amps = np.zeros(8, dtype=complex)
    amps[bit_index("100")] = np.sqrt(3 / 4)
    amps[bit_index("011")] = np.sqrt(3 / 16)
    amps[bit_index("101")] = np.sqrt(1 / 16)
    return StateVector(3, amps)


@pytest.fixture
def harp_linear():
    """Two playing strings, one penalized: diagonal (-1, -1, 1)."""
    return QuboProblem(["n1", "n2", "n3"], [-1.0, -1.0, 1.0], np.zeros((3, 3)))


@pytest.fixture
def harp_coupled():
    """Same harp via quadratic coefficients only."""
    b = np.array([[0.0, -1.0, 1.0], [-1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    return QuboProblem(["n1", "n2", "n3"], np.zeros(3), b)
