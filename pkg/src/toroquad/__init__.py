"""High-order singular quadrature and vacuum-field solves on toroidal surfaces."""

from ._backend import backend_name, set_num_threads
from .geom import (
    DegenerateSurfaceError,
    FourierSurface,
    SurfaceGrid,
    build_grid,
    builtin_surface,
    surface_eval,
    surface_frame,
)
from .grid import (
    GridFunction,
    QuadRule1D,
    fourier_diff,
    gauss_legendre,
    lagrange_interp,
    trapezoid_integrate,
)
from .kernels import (
    CoincidentPointError,
    CurrentLoop,
    biot_savart_loop,
    casing_bn_kernel,
    circle_loop,
    laplace_dl,
    laplace_sl,
    vecpot_kernel,
)
from .quad_merkel import (
    FundamentalForm,
    fundamental_form,
    merkel_dl_eval,
    merkel_dl_pv,
    merkel_sl_eval,
    subtracted_term_integral,
)
from .quad_pou import (
    LayerEvaluator,
    PouConfig,
    chi,
    layer_potential_eval,
    singular_part_eval,
    smooth_part_eval,
)
from .solver import GmresConfig, SolveReport, gmres, solve_exterior_neumann
from .physics import (
    FieldOnSurface,
    default_loop_pair,
    greens_identity_error,
    make_flux_surface,
    recover_external_field,
    virtual_casing_bn,
    virtual_casing_via_potential,
)
from .io import ConvergenceReport, load_loop, load_surface, save_loop, save_surface, write_report

__version__ = "0.1.0"
