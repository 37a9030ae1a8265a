"""Analytical reference solutions for benchmarks and boundary data.

Cantilever (end-loaded beam) fields, near-tip opening-mode asymptotics,
slanted-crack stress intensity factors of the biaxial infinite plate, and
the sliding-mode auxiliary fields used by the interaction integral.
"""

import numpy as np

from .element import Material


class TimoshenkoBeam:
    """End-loaded cantilever with a parabolic shear traction.

    The beam occupies [0, L] x [-D/2, D/2], is clamped (analytically) at
    x = 0 and loaded by a downward parabolic shear on x = L.  Plane
    stress.
    """

    def __init__(self, length=16.0, depth=4.0, load=1000.0, young=1.0e6, poisson=0.3):
        self.length = float(length)
        self.depth = float(depth)
        self.load = float(load)
        self.young = float(young)
        self.poisson = float(poisson)
        self.inertia = self.depth ** 3 / 12.0

    def material(self):
        return Material(self.young, self.poisson, "plane_stress")

    def displacement(self, x, y):
        p, e, nu = self.load, self.young, self.poisson
        l, d, i = self.length, self.depth, self.inertia
        ux = p * y / (6.0 * e * i) * ((6.0 * l - 3.0 * x) * x + (2.0 + nu) * (y * y - d * d / 4.0))
        uy = -p / (6.0 * e * i) * (3.0 * nu * y * y * (l - x)
                                   + (4.0 + 5.0 * nu) * d * d * x / 4.0
                                   + (3.0 * l - x) * x * x)
        return ux, uy

    def stress(self, x, y):
        p, l, i, d = self.load, self.length, self.inertia, self.depth
        sxx = p * (l - x) * y / i
        syy = 0.0
        txy = -p / (2.0 * i) * (d * d / 4.0 - y * y)
        return np.array([sxx, syy, txy])

    def end_shear_traction(self, x, y):
        """Traction vector on the free end (outward normal +x)."""
        s = self.stress(self.length, y)
        return s[0], s[2]

    def tip_deflection(self):
        return self.displacement(self.length, 0.0)[1]


class NearTipField:
    """Opening-mode crack tip asymptotics in a local tip frame.

    The tip frame has its origin at the tip, x along the direction of
    potential growth, and the crack faces at theta = +/- pi.  The
    displacement formulas embed the plane state through the Kolosov
    constant.
    """

    def __init__(self, k1, material, tip=(0.0, 0.0), angle=0.0):
        self.k1 = float(k1)
        self.material = material
        self.tip = np.asarray(tip, dtype=float)
        self.angle = float(angle)

    def _to_local(self, x, y):
        dx, dy = x - self.tip[0], y - self.tip[1]
        c, s = np.cos(self.angle), np.sin(self.angle)
        xl = c * dx + s * dy
        yl = -s * dx + c * dy
        r = np.hypot(xl, yl)
        th = np.arctan2(yl, xl)
        return r, th

    def displacement(self, x, y):
        r, th = self._to_local(x, y)
        if np.any(np.asarray(r) == 0.0):
            raise ValueError("near-tip field is singular at the tip")
        ul = williams_displacement("I", self.k1, r, th, self.material)
        c, s = np.cos(self.angle), np.sin(self.angle)
        return c * ul[0] - s * ul[1], s * ul[0] + c * ul[1]

    def displacement_on_face(self, x, y, side):
        """Displacement on a crack face; side +1 is theta = +pi, -1 is -pi."""
        r, _ = self._to_local(x, y)
        th = np.pi if side > 0 else -np.pi
        ul = williams_displacement("I", self.k1, r, th, self.material)
        c, s = np.cos(self.angle), np.sin(self.angle)
        return c * ul[0] - s * ul[1], s * ul[0] + c * ul[1]

    def stress(self, x, y):
        """Voigt stress in global axes."""
        r, th = self._to_local(x, y)
        if np.any(np.asarray(r) == 0.0):
            raise ValueError("near-tip field is singular at the tip")
        sl = williams_stress("I", self.k1, r, th)
        c, s = np.cos(self.angle), np.sin(self.angle)
        rot = np.array([[c, -s], [s, c]])
        t = rot @ np.array([[sl[0], sl[2]], [sl[2], sl[1]]]) @ rot.T
        return np.array([t[0, 0], t[1, 1], t[0, 1]])

    def traction(self, x, y, normal):
        s = self.stress(x, y)
        t = np.array([[s[0], s[2]], [s[2], s[1]]])
        return tuple(t @ np.asarray(normal, dtype=float))


def williams_displacement(mode, k, r, theta, material):
    """Near-tip displacement of a unit-thickness crack body, tip frame."""
    mu = material.shear_modulus
    kappa = material.kolosov
    amp = k / (2.0 * mu) * np.sqrt(r / (2.0 * np.pi))
    half = 0.5 * theta
    if mode == "I":
        ux = amp * np.cos(half) * (kappa - np.cos(theta))
        uy = amp * np.sin(half) * (kappa - np.cos(theta))
    elif mode == "II":
        ux = amp * np.sin(half) * (kappa + 2.0 + np.cos(theta))
        uy = -amp * np.cos(half) * (kappa - 2.0 + np.cos(theta))
    else:
        raise ValueError(f"unknown crack mode {mode!r}")
    return np.array([ux, uy])


def williams_stress(mode, k, r, theta):
    """Near-tip Voigt stress (xx, yy, xy) in the tip frame."""
    amp = k / np.sqrt(2.0 * np.pi * r)
    h = 0.5 * theta
    c, s = np.cos(h), np.sin(h)
    c3, s3 = np.cos(3.0 * h), np.sin(3.0 * h)
    if mode == "I":
        sxx = amp * c * (1.0 - s * s3)
        syy = amp * c * (1.0 + s * s3)
        sxy = amp * s * c * c3
    elif mode == "II":
        sxx = -amp * s * (2.0 + c * c3)
        syy = amp * s * c * c3
        sxy = amp * c * (1.0 - s * s3)
    else:
        raise ValueError(f"unknown crack mode {mode!r}")
    return np.array([sxx, syy, sxy])


def williams_displacement_gradient_x(mode, k, r, theta, material):
    """d(u_x, u_y)/dx in the tip frame (x along the crack direction).

    Needed by the interaction integral; derived from the polar chain rule
    d/dx = cos(theta) d/dr - sin(theta)/r d/dtheta.
    """
    if np.any(np.asarray(r) == 0.0):
        raise ValueError("singular at the tip")
    mu = material.shear_modulus
    kappa = material.kolosov
    amp = k / (2.0 * mu * np.sqrt(2.0 * np.pi))
    h = 0.5 * theta
    ct, st = np.cos(theta), np.sin(theta)
    ch, sh = np.cos(h), np.sin(h)
    if mode == "I":
        gx = ch * (kappa - ct)
        gy = sh * (kappa - ct)
        dgx = -0.5 * sh * (kappa - ct) + ch * st
        dgy = 0.5 * ch * (kappa - ct) + sh * st
    elif mode == "II":
        gx = sh * (kappa + 2.0 + ct)
        gy = -ch * (kappa - 2.0 + ct)
        dgx = 0.5 * ch * (kappa + 2.0 + ct) - sh * st
        dgy = 0.5 * sh * (kappa - 2.0 + ct) + ch * st
    else:
        raise ValueError(f"unknown crack mode {mode!r}")
    # u = amp sqrt(r) g(theta):
    # du/dx = amp (g cos(theta) / 2 - g' sin(theta)) / sqrt(r)
    dux = amp * (0.5 * gx * ct - dgx * st) / np.sqrt(r)
    duy = amp * (0.5 * gy * ct - dgy * st) / np.sqrt(r)
    return np.array([dux, duy])


def mode2_auxiliary(r, theta, material, k2=1.0):
    """Sliding-mode auxiliary state: displacement, Voigt stress, tip frame."""
    u = williams_displacement("II", k2, r, theta, material)
    s = williams_stress("II", k2, r, theta)
    return u, s


def slanted_sifs(sigma, a, alpha, beta):
    """Exact SIFs of a slanted crack in an infinite biaxial field.

    sigma: remote vertical stress; a: half crack length; alpha: biaxiality
    ratio of the horizontal stress; beta: crack angle to the x axis.
    """
    if a <= 0:
        raise ValueError("half length must be positive")
    base = sigma * np.sqrt(np.pi * a)
    k1 = base * (np.cos(beta) ** 2 + alpha * np.sin(beta) ** 2)
    k2 = base * (1.0 - alpha) * np.sin(beta) * np.cos(beta)
    return k1, k2


class SlantedCrackExact:
    """Parameter bundle for the slanted-crack benchmark."""

    def __init__(self, sigma=2000.0, a=0.5, alpha=0.0, beta=0.0):
        if not 0.0 <= beta <= np.pi / 2:
            raise ValueError("crack angle must lie in [0, pi/2]")
        self.sigma = float(sigma)
        self.a = float(a)
        self.alpha = float(alpha)
        self.beta = float(beta)

    def sifs(self):
        return slanted_sifs(self.sigma, self.a, self.alpha, self.beta)
