"""STO-3G quantum-chemistry engine and qubit-Hamiltonian fixture generator."""

from .molecules import MoleculeSpec, build_molecule
from .generate import generate, generate_series, build_qubit_hamiltonian

__version__ = "0.1.0"
