"""Numerical verification toolkit for products of primes in residue classes.

Submodules:

- ``modgroup``: unit groups (Z/qZ)* and Dirichlet characters
- ``charfourier``: Fourier analysis on the unit group
- ``primesets``: prime sieving and the product sets E_k(x)
- ``selberg``: Selberg sieve weights and character-sum scans
- ``suppbound``: Fourier lower bounds for support sizes
- ``groupcomb``: product sets, stabilizers and Kneser checks in finite abelian groups
- ``analytic``: weighted prime sums and real-part certificates
- ``cli``: command-line driver
"""

from .errors import DegenerateInputError, PrimeprodError, ResourceLimitError
from .modgroup import DirichletCharacter, Modulus, UnitGroup, characters, factorize, unit_group_structure

__version__ = "0.1.0"

__all__ = [
    "DegenerateInputError",
    "DirichletCharacter",
    "Modulus",
    "PrimeprodError",
    "ResourceLimitError",
    "UnitGroup",
    "characters",
    "factorize",
    "unit_group_structure",
    "__version__",
]
