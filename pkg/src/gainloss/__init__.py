"""Two-site open quantum system with unbalanced incoherent gain and loss."""

__version__ = "0.1.0"

from .core import SystemParams, hamiltonian, site_operators  # noqa: E402
from .liouvillian import (build_liouvillian, evolve, liouvillian_gap,  # noqa: E402
                          solve_steady_state, steady_state)

__all__ = ["SystemParams", "hamiltonian", "site_operators", "build_liouvillian", "evolve",
           "liouvillian_gap", "solve_steady_state", "steady_state", "__version__"]
