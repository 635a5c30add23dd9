"""Degree-truncated computations with unstable modules over the mod-2 Steenrod algebra.

The package builds the Singer-type functor on unstable modules three
independent ways (the explicit squaring-formula span, the kernel of the
reduced T-functor comparison map, and an invariant ring) and mechanically
verifies the structural identities relating them, degree by degree, over
exact GF(2) linear algebra.
"""

from .f2core import KERNEL_NAME, BitMatrix, Subspace

__version__ = "0.1.0"

__all__ = ["BitMatrix", "Subspace", "KERNEL_NAME", "__version__"]
