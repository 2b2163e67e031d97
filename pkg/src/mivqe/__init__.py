"""Mutual-information-assisted adaptive VQE on a classical statevector simulator."""

__version__ = "0.1.0"

from .pauli import PauliSum, PauliWord

__all__ = ["PauliSum", "PauliWord", "__version__"]
