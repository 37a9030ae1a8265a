"""Global DOF management, sparse assembly, boundary conditions, solve."""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .element import local_stiffness, boundary_load, body_load
from .mesh import CRACK_TAG


class DofMap:
    """Two DOFs per vertex: (2*v, 2*v + 1).

    Duplicated crack-face vertices are separate vertices and therefore
    receive distinct DOFs automatically.
    """

    def __init__(self, n_vertices):
        self.n_vertices = int(n_vertices)
        self.n_dofs = 2 * self.n_vertices

    def dof(self, node, comp):
        return 2 * int(node) + int(comp)

    def element_dofs(self, cycle):
        idx = np.asarray(cycle, dtype=int)
        out = np.empty(2 * len(idx), dtype=int)
        out[0::2] = 2 * idx
        out[1::2] = 2 * idx + 1
        return out


class BoundaryConditionSet:
    """Dirichlet values, tagged Neumann tractions, and a body force.

    dirichlet: iterable of (node, component, value).
    neumann: iterable of (boundary_tag, traction_fn) with
        traction_fn(x, y) -> (tx, ty).
    Crack faces never receive traction terms.
    """

    def __init__(self, dirichlet=(), neumann=(), body_force=(0.0, 0.0)):
        self.dirichlet = [(int(n), int(c), float(v)) for n, c, v in dirichlet]
        self.neumann = list(neumann)
        self.body_force = np.asarray(body_force, dtype=float)

    def validate(self, dofmap):
        seen = {}
        for n, c, v in self.dirichlet:
            key = dofmap.dof(n, c)
            if key in seen and abs(seen[key] - v) > 1e-12 * (1 + abs(v)):
                raise ValueError(f"conflicting Dirichlet values at dof {key}")
            seen[key] = v
        return seen


class AssembledSystem:
    """Sparse symmetric stiffness plus per-element kernel matrices."""

    def __init__(self, mesh, material, gamma, k_global, dofmap, local_mats):
        self.mesh = mesh
        self.material = material
        self.gamma = gamma
        self.k_global = k_global
        self.dofmap = dofmap
        self.local_mats = local_mats


def assemble(mesh, material, gamma=1.0):
    """Assemble the global stiffness matrix (deterministic ordering)."""
    dofmap = DofMap(mesh.n_vertices)
    local_mats = []
    rows, cols, vals = [], [], []
    for e in range(mesh.n_elements):
        lm = local_stiffness(mesh, e, material, gamma)
        local_mats.append(lm)
        dofs = dofmap.element_dofs(mesh.elements[e])
        nd = len(dofs)
        rows.append(np.repeat(dofs, nd))
        cols.append(np.tile(dofs, nd))
        vals.append(lm.k_local.ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    k = sp.coo_matrix((vals, (rows, cols)), shape=(dofmap.n_dofs, dofmap.n_dofs)).tocsr()
    return AssembledSystem(mesh, material, gamma, k, dofmap, local_mats)


class ConstrainedSystem:
    def __init__(self, assembled, k_mod, f_mod, fixed, fixed_values, f_applied):
        self.assembled = assembled
        self.k_mod = k_mod
        self.f_mod = f_mod
        self.fixed = fixed
        self.fixed_values = fixed_values
        self.f_applied = f_applied


def apply_bcs(assembled, bcs):
    """Accumulate loads and eliminate Dirichlet DOFs symmetrically."""
    mesh = assembled.mesh
    dofmap = assembled.dofmap
    n = dofmap.n_dofs
    f = np.zeros(n)

    tractions = {}
    for tag, fn in bcs.neumann:
        tractions.setdefault(tag, []).append(fn)
    if tractions:
        for e, le, tag in mesh.boundary:
            if tag == CRACK_TAG or tag not in tractions:
                continue
            dofs = dofmap.element_dofs(mesh.elements[e])
            for fn in tractions[tag]:
                f[dofs] += boundary_load(mesh, e, le, fn)

    if np.any(bcs.body_force):
        for e in range(mesh.n_elements):
            dofs = dofmap.element_dofs(mesh.elements[e])
            f[dofs] += body_load(mesh, e, assembled.local_mats[e], bcs.body_force)

    prescribed = bcs.validate(dofmap)
    if not prescribed:
        raise ValueError("singular system: no Dirichlet data constrains the rigid modes")
    fixed = np.zeros(n, dtype=bool)
    values = np.zeros(n)
    for dof, v in prescribed.items():
        fixed[dof] = True
        values[dof] = v

    f_applied = f.copy()
    k = assembled.k_global
    # Move prescribed columns to the RHS, then zero rows/cols and put a
    # unit diagonal so the eliminated system stays SPD.
    f_mod = f - k @ (values * fixed)
    f_mod[fixed] = values[fixed]
    free = ~fixed
    diag_fix = sp.diags(fixed.astype(float))
    diag_free = sp.diags(free.astype(float))
    k_mod = diag_free @ k @ diag_free + diag_fix
    return ConstrainedSystem(assembled, k_mod.tocsr(), f_mod, fixed, values, f_applied)


class Solution:
    """Nodal displacements plus per-element projected field accessors."""

    def __init__(self, assembled, u, diagnostics=None):
        self.mesh = assembled.mesh
        self.material = assembled.material
        self.assembled = assembled
        self.u = u
        self.diagnostics = diagnostics or {}

    def element_dof_values(self, e):
        dofs = self.assembled.dofmap.element_dofs(self.mesh.elements[e])
        return self.u[dofs]

    def element_strain(self, e):
        """Constant Voigt strain of the projected displacement."""
        return self.assembled.local_mats[e].strain(self.element_dof_values(e))

    def element_stress(self, e):
        return self.material.d_mat @ self.element_strain(e)

    def element_stresses(self):
        return np.array([self.element_stress(e) for e in range(self.mesh.n_elements)])

    def element_displacement_coeffs(self, e):
        return self.assembled.local_mats[e].displacement_coeffs(self.element_dof_values(e))

    def projected_displacement(self, e, points):
        """Projected displacement field of element e at given points."""
        lm = self.assembled.local_mats[e]
        m = lm.basis.evaluate(points)
        c = self.element_displacement_coeffs(e)
        return m @ c

    def element_displacement_gradient(self, e):
        lm = self.assembled.local_mats[e]
        return lm.displacement_gradient(self.element_dof_values(e))

    def nodal_displacements(self):
        return self.u.reshape(-1, 2)

    def reactions(self, constrained):
        """Residual K u - f_applied at the constrained DOFs."""
        r = self.assembled.k_global @ self.u - constrained.f_applied
        return np.where(constrained.fixed, r, 0.0)


def solve(constrained):
    """Direct sparse solve of the constrained SPD system."""
    k = constrained.k_mod
    f = constrained.f_mod
    try:
        lu = spla.splu(k.tocsc())
        u = lu.solve(f)
    except RuntimeError as exc:
        raise ValueError(f"linear solve failed (singular or indefinite system): {exc}") from exc
    if not np.all(np.isfinite(u)):
        raise ValueError("linear solve produced non-finite values")
    fn = np.linalg.norm(f)
    residual = np.linalg.norm(k @ u - f) / (fn if fn > 0 else 1.0)
    if residual > 1e-8:
        raise ValueError(f"linear solve residual too large: {residual:.3e}")
    diag = {"residual": residual, "n_dofs": k.shape[0]}
    return Solution(constrained.assembled, u, diag)


def solve_problem(mesh, material, bcs, gamma=1.0):
    """Assemble, constrain, and solve in one call."""
    assembled = assemble(mesh, material, gamma)
    constrained = apply_bcs(assembled, bcs)
    solution = solve(constrained)
    solution.diagnostics["constrained"] = constrained
    return solution
