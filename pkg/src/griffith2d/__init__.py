"""2D Griffith fracture energies with non-interpenetration diagnostics.

Planar geometry kernel, regionwise-smooth fields with polygonal jump sets,
nonlinear/linearized energy evaluation, Ciarlet-Necas and contact checks,
counterexample and recovery-sequence constructions, and a contact-constrained
P1 solver on cracked meshes.
"""

from .constructions import (
    RecoveryParams,
    SweepRow,
    asymptotic_report,
    build_recovery,
    example_basic,
    example_staircase,
    opening_twin,
    sliding_twin,
    strengthen_contact,
    sweep,
)
from .energy import (
    EnergyParams,
    EnergyReport,
    density_W,
    det_expansion_check,
    dist_SO2,
    linear_energy,
    nonlinear_energy,
    quadratic_Q,
)
from .errors import Griffith2dError
from .fields import (
    Bump,
    CrackEdge,
    Region,
    RegionField,
    RegionMap,
    build_field,
    crack_edges,
    field_from_json,
    field_to_json,
    gradient,
    hessian,
    induced_displacement,
    jump_length,
    trace_jump,
)
from .geom2d import (
    Polygon,
    PolygonSet,
    Segment,
    boolean_op,
    dilation_area,
    polygon_area,
    projection_measure_V,
    slice_count,
)
from .noninterp import (
    BlowupReport,
    CcReport,
    CnReport,
    bad_jump_set,
    blowup_hypotheses,
    cc_check,
    cn_check,
    dpm_conclusion_check,
    measure_image,
)
from .solver import (
    CrackedMesh,
    SolveReport,
    energy_of_solution,
    mesh_cracked_domain,
    solve_contact,
)

__version__ = "0.1.0"
