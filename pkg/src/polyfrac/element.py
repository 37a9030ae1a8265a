"""Per-element virtual element kernel for first-order plane elasticity.

Shape functions are never evaluated inside an element; everything is
built from boundary traces.  Each element carries six vector monomial
modes (two translations, one rotation, shear, deviatoric axial,
volumetric), a projector onto that space, a consistency stiffness exact
on linear fields, and a rank-completing stabilization acting on the
non-polynomial remainder.
"""

import numpy as np

from . import geometry as geo

N_MODES = 6


class Material:
    """Isotropic linear elastic material in plane stress or plane strain.

    d_mat is the 3x3 constitutive matrix in Voigt ordering
    (xx, yy, xy with engineering shear).
    """

    def __init__(self, young, poisson, state="plane_stress"):
        if young <= 0:
            raise ValueError("Young's modulus must be positive")
        if not -1.0 < poisson < 0.5:
            raise ValueError("Poisson ratio out of range")
        state = state.replace("-", "_").lower()
        if state not in ("plane_stress", "plane_strain"):
            raise ValueError(f"unknown plane state {state!r}")
        self.young = float(young)
        self.poisson = float(poisson)
        self.state = state
        e, nu = self.young, self.poisson
        if state == "plane_stress":
            c = e / (1.0 - nu * nu)
            self.d_mat = c * np.array([
                [1.0, nu, 0.0],
                [nu, 1.0, 0.0],
                [0.0, 0.0, 0.5 * (1.0 - nu)],
            ])
        else:
            c = e / ((1.0 + nu) * (1.0 - 2.0 * nu))
            self.d_mat = c * np.array([
                [1.0 - nu, nu, 0.0],
                [nu, 1.0 - nu, 0.0],
                [0.0, 0.0, 0.5 * (1.0 - 2.0 * nu)],
            ])
        self.compliance = np.linalg.inv(self.d_mat)

    @property
    def effective_young(self):
        """E for plane stress, E/(1-nu^2) for plane strain."""
        if self.state == "plane_stress":
            return self.young
        return self.young / (1.0 - self.poisson ** 2)

    @property
    def kolosov(self):
        """Kolosov constant kappa of the plane state."""
        nu = self.poisson
        if self.state == "plane_stress":
            return (3.0 - nu) / (1.0 + nu)
        return 3.0 - 4.0 * nu

    @property
    def shear_modulus(self):
        return self.young / (2.0 * (1.0 + self.poisson))

    def __repr__(self):
        return f"Material(E={self.young:g}, nu={self.poisson:g}, {self.state})"


class MonomialBasis:
    """Centered, diameter-scaled vector monomials of one element.

    Columns of the 2x6 evaluation matrix: x-translation, y-translation,
    rotation (-eta, xi), shear (eta, xi), deviatoric axial (xi, -eta),
    volumetric (xi, eta), with xi = (x - xc)/h, eta = (y - yc)/h.
    """

    def __init__(self, centroid, diameter):
        self.centroid = np.asarray(centroid, dtype=float)
        self.diameter = float(diameter)

    def evaluate(self, points):
        """Monomial matrix at given points: shape (..., 2, 6)."""
        pts = np.asarray(points, dtype=float)
        squeeze = pts.ndim == 1
        pts = np.atleast_2d(pts)
        xi = (pts[:, 0] - self.centroid[0]) / self.diameter
        eta = (pts[:, 1] - self.centroid[1]) / self.diameter
        n = len(pts)
        m = np.zeros((n, 2, N_MODES))
        m[:, 0, 0] = 1.0
        m[:, 1, 1] = 1.0
        m[:, 0, 2] = -eta
        m[:, 1, 2] = xi
        m[:, 0, 3] = eta
        m[:, 1, 3] = xi
        m[:, 0, 4] = xi
        m[:, 1, 4] = -eta
        m[:, 0, 5] = xi
        m[:, 1, 5] = eta
        return m[0] if squeeze else m

    def strains(self):
        """Constant Voigt strain of each mode, shape (6, 3)."""
        h = self.diameter
        s = np.zeros((N_MODES, 3))
        s[3] = (0.0, 0.0, 2.0 / h)
        s[4] = (1.0 / h, -1.0 / h, 0.0)
        s[5] = (1.0 / h, 1.0 / h, 0.0)
        return s

    def gradients(self):
        """Constant displacement gradient du_i/dx_j of each mode, shape (6, 2, 2)."""
        h = self.diameter
        g = np.zeros((N_MODES, 2, 2))
        g[2] = [[0.0, -1.0], [1.0, 0.0]]
        g[3] = [[0.0, 1.0], [1.0, 0.0]]
        g[4] = [[1.0, 0.0], [0.0, -1.0]]
        g[5] = [[1.0, 0.0], [0.0, 1.0]]
        return g / h


def build_monomials(geom):
    """Monomial basis of an element from its geometry record."""
    return MonomialBasis(geom.centroid, geom.diameter)


def voigt_to_tensor(s):
    return np.array([[s[0], s[2]], [s[2], s[1]]])


class ProjectionMatrices:
    """Nodal monomial values and the projector data of one element."""

    def __init__(self, d, b, g, pi_star, pi):
        self.d = d
        self.b = b
        self.g = g
        self.pi_star = pi_star
        self.pi = pi


def _projection_from_coords(coords, material, basis=None, geom=None):
    """Core projector construction from raw CCW vertex coordinates."""
    coords = np.asarray(coords, dtype=float)
    n = len(coords)
    if geom is None:
        if geo.polygon_signed_area(coords) <= 0:
            raise ValueError("element vertices must be counter-clockwise")
        area = geo.polygon_area(coords)
        centroid = geo.polygon_centroid(coords)
        diameter = geo.polygon_diameter(coords)
        normals = geo.edge_outward_normals(coords)
        lengths = geo.edge_lengths(coords)
    else:
        area = geom.area
        centroid = geom.centroid
        diameter = geom.diameter
        normals = geom.normals
        lengths = geom.edge_lengths
    if basis is None:
        basis = MonomialBasis(centroid, diameter)

    m_nodes = basis.evaluate(coords)              # (n, 2, 6)
    # Interleave: row 2i is the x-component at vertex i, row 2i+1 the y.
    d = np.empty((2 * n, N_MODES))
    d[0::2] = m_nodes[:, 0, :]
    d[1::2] = m_nodes[:, 1, :]

    # Vertex-weighted outward normals: d_i = (L_{i-1} n_{i-1} + L_i n_i)/2.
    wn = 0.5 * (lengths[:, None] * normals + np.roll(lengths[:, None] * normals, 1, axis=0))

    strains = basis.strains()
    stresses = strains @ material.d_mat.T         # (6, 3) constant mode stresses

    b = np.zeros((N_MODES, 2 * n))
    for alpha in range(3, N_MODES):
        sig = voigt_to_tensor(stresses[alpha])
        tn = wn @ sig.T                           # (n, 2): sigma . d_i
        b[alpha, 0::2] = tn[:, 0]
        b[alpha, 1::2] = tn[:, 1]

    g = np.zeros((N_MODES, N_MODES))
    # Energy rows from exact boundary integrals of the linear traces
    # (two-point Lobatto = trapezoid per edge, exact here).
    m_next = np.roll(m_nodes, -1, axis=0)
    for alpha in range(3, N_MODES):
        sig = voigt_to_tensor(stresses[alpha])
        tn = normals @ sig.T                      # (n, 2): traction per edge
        vals = np.einsum("ec,ecb->eb", tn, 0.5 * (m_nodes + m_next))
        g[alpha] = (lengths[:, None] * vals).sum(axis=0)

    # Rank fix: translation rows enforce matching vertex averages, the
    # rotation row matches the mean rotation (a boundary integral).  Rows
    # are scaled to the magnitude of the energy rows for conditioning.
    row_scale = np.trace(material.d_mat)
    g[0] = row_scale * d[0::2].sum(axis=0) / n
    g[1] = row_scale * d[1::2].sum(axis=0) / n
    b[0, 0::2] = row_scale / n
    b[1, 1::2] = row_scale / n
    g[2] = 0.0
    g[2, 2] = row_scale
    b[2, 0::2] = -row_scale * diameter * wn[:, 1] / (2.0 * area)
    b[2, 1::2] = row_scale * diameter * wn[:, 0] / (2.0 * area)

    try:
        g_inv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise ValueError("degenerate element geometry: singular projector system") from exc
    pi_star = g_inv @ b
    pi = d @ pi_star
    return ProjectionMatrices(d, b, g, pi_star, pi), basis, area, diameter


def compute_projection(mesh, e, basis=None, material=None):
    """Projector matrices of element e of a mesh."""
    if material is None:
        raise ValueError("material required")
    geom = mesh.element_geometry(e)
    proj, _, _, _ = _projection_from_coords(mesh.element_coords(e), material,
                                            basis=basis, geom=geom)
    return proj


class LocalVemMatrices:
    """Everything assembled per element: projector, stabilization, stiffness."""

    def __init__(self, proj, basis, a, s_star_scale, k_consistency, k_local,
                 area, diameter):
        self.d = proj.d
        self.b = proj.b
        self.g = proj.g
        self.pi_star = proj.pi_star
        self.pi = proj.pi
        self.a = a
        self.s_star_scale = s_star_scale      # gamma * alpha*: S* = scale * I
        self.k_consistency = k_consistency
        self.k_local = k_local
        self.basis = basis
        self.area = area
        self.diameter = diameter

    @property
    def n_dofs(self):
        return self.d.shape[0]

    def displacement_coeffs(self, u_local):
        """Monomial coefficients of the projected displacement."""
        return self.pi_star @ u_local

    def strain(self, u_local):
        """Constant Voigt strain of the projected displacement."""
        return self.basis.strains().T @ self.displacement_coeffs(u_local)

    def displacement_gradient(self, u_local):
        """Constant 2x2 gradient du_i/dx_j of the projected displacement."""
        c = self.displacement_coeffs(u_local)
        return np.einsum("b,bij->ij", c, self.basis.gradients())


def local_stiffness(mesh_or_coords, e=None, material=None, gamma=1.0):
    """Local stiffness of one element (consistency + stabilization).

    Accepts either (mesh, element_id, material) or raw CCW coordinates as
    the first argument with e omitted.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if e is None:
        coords = np.asarray(mesh_or_coords, dtype=float)
        geom = None
    else:
        coords = mesh_or_coords.element_coords(e)
        geom = mesh_or_coords.element_geometry(e)
    proj, basis, area, diameter = _projection_from_coords(coords, material, geom=geom)

    a = proj.g.copy()
    a[:3, :] = 0.0
    k_c = proj.pi_star.T @ a @ proj.pi_star
    k_c = 0.5 * (k_c + k_c.T)

    d_c = proj.d[:, 2:]
    alpha_star = 0.1 * area * np.trace(material.d_mat) * \
        np.trace(np.linalg.inv(d_c.T @ d_c))
    scale = gamma * alpha_star
    n_dofs = proj.d.shape[0]
    residual = np.eye(n_dofs) - proj.pi
    k_s = scale * (residual.T @ residual)
    k_local = k_c + k_s
    k_local = 0.5 * (k_local + k_local.T)
    return LocalVemMatrices(proj, basis, a, scale, k_c, k_local, area, diameter)


# Two-point Gauss on [-1, 1]; exact for the cubic edge integrands of the
# load terms, and reused with 4 points for non-polynomial integrands.
GAUSS_2 = (np.array([-1.0, 1.0]) / np.sqrt(3.0), np.array([1.0, 1.0]))
GAUSS_4 = (
    np.array([-0.8611363115940526, -0.3399810435848563,
              0.3399810435848563, 0.8611363115940526]),
    np.array([0.3478548451374538, 0.6521451548625461,
              0.6521451548625461, 0.3478548451374538]),
)


def boundary_load(mesh, e, local_edge, traction):
    """Nodal force from a traction on one element edge.

    traction(x, y) -> (tx, ty); integrated against the linear edge trace
    with two-point Gauss, so only the two edge endpoint DOF entries of the
    returned (2 n_V,) vector are populated.
    """
    cyc = mesh.elements[e]
    n = len(cyc)
    i, j = local_edge, (local_edge + 1) % n
    pa = mesh.vertices[cyc[i]]
    pb = mesh.vertices[cyc[j]]
    length = float(np.hypot(*(pb - pa)))
    f = np.zeros(2 * n)
    pts, wts = GAUSS_2
    for t, w in zip(pts, wts):
        s = 0.5 * (1.0 + t)
        x, y = pa + s * (pb - pa)
        tx, ty = traction(x, y)
        phi_a, phi_b = 1.0 - s, s
        scale = 0.5 * length * w
        f[2 * i] += scale * phi_a * tx
        f[2 * i + 1] += scale * phi_a * ty
        f[2 * j] += scale * phi_b * tx
        f[2 * j + 1] += scale * phi_b * ty
    return f


def body_load(mesh, e, local_mats, b):
    """Nodal force of a constant body force via the projected test space.

    With centered monomials only the two translation moments survive, so
    the load reduces to pi_star^T . (|K| b, 0, 0, 0, 0).
    """
    moments = np.zeros(N_MODES)
    moments[0] = local_mats.area * b[0]
    moments[1] = local_mats.area * b[1]
    return local_mats.pi_star.T @ moments


def project_scalar(coords, values, area=None, centroid=None, diameter=None):
    """Element-local linear fit of a nodal scalar field.

    Matches the boundary-integral gradient average and the vertex mean.
    Returns (value_at_centroid_offset a, grad_x, grad_y) so the field is
    a + grad . (x - centroid).
    """
    coords = np.asarray(coords, dtype=float)
    values = np.asarray(values, dtype=float)
    if area is None:
        area = geo.polygon_area(coords)
        centroid = geo.polygon_centroid(coords)
    normals = geo.edge_outward_normals(coords)
    lengths = geo.edge_lengths(coords)
    v_next = np.roll(values, -1)
    edge_means = 0.5 * (values + v_next)
    grad = (normals * (lengths * edge_means)[:, None]).sum(axis=0) / area
    offsets = coords - centroid
    a = values.mean() - grad @ offsets.mean(axis=0)
    return a, grad


def eval_scalar_projection(fit, point, centroid):
    a, grad = fit
    return a + grad @ (np.asarray(point) - centroid)
