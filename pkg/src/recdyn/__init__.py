"""recdyn: spatial discretizations of torus maps and their combinatorics.

Simulate what happens when a dynamical system on the torus or circle is
forced onto a finite uniform grid: measure the degree of recurrence and the
rates of injectivity of the induced finite map, compute the mean rates of
lattice model sets attached to sequences of linear maps, and cross-check the
local-global formulas relating the two for smooth and expanding maps.
"""

__version__ = "0.1.0"

from .errors import NumericalGuardError, RecdynError, ValidationError
from .grid import (
    FiniteMap,
    GridSpec,
    TorusPoint,
    discretize,
    dump_finite_map,
    load_finite_map,
    project,
)
from .funcgraph import (
    RecurrenceReport,
    analyze,
    degree_of_recurrence,
    rate_of_injectivity_t,
    recurrent_set,
)
from .lindisc import (
    BallRate,
    MatrixSeq,
    PointSet,
    hat_apply,
    image_set,
    random_sl2_seq,
    rate_injectivity_ball,
    rate_injectivity_ball_prefixes,
    render_image,
)
from .modelset import (
    LatticeBasis,
    MeanRateResult,
    Window,
    mean_rate,
    mean_rate_alt,
    member,
    overlap_inequality_check,
)
from .expanding import (
    DecoratedTree,
    ExpandingCircleMap,
    TransferOperator,
    doubling_map,
    local_global_tau_expanding,
    mean_density_at,
    preimages,
    tree_density,
    trig_expanding_map,
)
from .localglobal import (
    Cocycle,
    SmoothMap,
    circle_as_torus_map,
    cocycle,
    contracting_perturbation,
    get_builtin,
    identity_map,
    linear_toral_map,
    shear_pair_map,
    tau_k_integral,
)

__all__ = [
    "__version__",
    "RecdynError",
    "ValidationError",
    "NumericalGuardError",
    "GridSpec",
    "TorusPoint",
    "FiniteMap",
    "project",
    "discretize",
    "dump_finite_map",
    "load_finite_map",
    "RecurrenceReport",
    "analyze",
    "recurrent_set",
    "degree_of_recurrence",
    "rate_of_injectivity_t",
    "MatrixSeq",
    "PointSet",
    "BallRate",
    "hat_apply",
    "image_set",
    "rate_injectivity_ball",
    "rate_injectivity_ball_prefixes",
    "render_image",
    "random_sl2_seq",
    "Window",
    "LatticeBasis",
    "MeanRateResult",
    "member",
    "mean_rate",
    "mean_rate_alt",
    "overlap_inequality_check",
    "ExpandingCircleMap",
    "DecoratedTree",
    "TransferOperator",
    "doubling_map",
    "trig_expanding_map",
    "preimages",
    "tree_density",
    "mean_density_at",
    "local_global_tau_expanding",
    "SmoothMap",
    "Cocycle",
    "cocycle",
    "get_builtin",
    "identity_map",
    "shear_pair_map",
    "linear_toral_map",
    "contracting_perturbation",
    "circle_as_torus_map",
    "tau_k_integral",
]
