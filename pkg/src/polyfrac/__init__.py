"""polyfrac: virtual element analysis of 2D linear elastic fracture.

Plane elasticity on arbitrary polygonal meshes with mesh-conforming
cracks, patch-recovery error estimation, adaptive refinement, and
interaction-integral stress intensity factors.
"""

from .mesh import (
    PolyMesh,
    CrackGeometry,
    CrackTip,
    ElementGeometry,
    generate_structured,
    generate_voronoi,
    insert_crack,
    element_geometry,
    read_mesh,
    write_mesh,
)
from .element import (
    Material,
    MonomialBasis,
    LocalVemMatrices,
    build_monomials,
    compute_projection,
    local_stiffness,
    boundary_load,
    body_load,
)
from .system import (
    DofMap,
    BoundaryConditionSet,
    Solution,
    assemble,
    apply_bcs,
    solve,
    solve_problem,
)

__version__ = "0.1.0"
