from .discretization import (Discretization, Dissipation, Formulation, build_discretization, entropy_project,
                             integrate, interpolate_initial, physical_nodes, residual, rhs, spatial_entropy)
from .flux import flux_differencing, mortar_flux_correction
from .timestep import estimate_dt, rk45_advance
