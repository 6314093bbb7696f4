"""Numerical free multiplicative convolution via analytic subordination."""
from .density import AtomReport, DensityGrid, atoms, density, density_at, density_grid, mass_check
from .edges import SupportInfo, edge_function, find_support, near_edge_density, sqrt_coefficients
from .errors import (BoundaryError, ConvergenceError, DegenerateEdgeError, DomainError, FreeConvError,
                     PoleError, SingularityError, StructureError)
from .measures import (Atom, JacobiComponent, Measure, dilate, load_measure, make_jacobi,
                       measure_from_dict, measure_stats, moment, point_mass, validate)
from .oracles import (ClosedForm, bernoulli_square_density, compare, s_series_moments,
                      table_density)
from .subordination import (EpsLadder, SubordinationState, default_ladder, solve_boundary,
                            solve_grid, solve_point, stability_check)
from .transforms import M_derivatives, eta_psi, m_transform, stieltjes

__version__ = "0.1.0"
