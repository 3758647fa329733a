"""Hyperbolic geometry on PSL(2,R).

PSL(2,R) is the unit tangent bundle of the hyperbolic plane: the coset g.i
(Moebius action on the upper half-plane) is the base point and the rotation
part fixes the direction.  All dynamics in this package act by exact 2x2
matrix products; disk coordinates (z, theta) are derived views obtained via
the Cayley transform and are used only for output and sampling.

The quotient surface is the genus-2 surface whose Fuchsian group is generated
by four conjugated hyperbolic translations with trace 2+2*sqrt(2); its
Dirichlet domain at the origin is a regular hyperbolic octagon of area 4*pi.
"""

import numpy as np

_DET_TOL = 1e-12
_DET_RENORM = 1e-13

# orthonormal basis of sl(2,R) for the left-invariant metric; X1 generates
# the geodesic flow and sum Xi^2 is the Laplace-Beltrami operator (the group
# is unimodular, so no first-order correction appears)
X1 = 0.5 * np.array([[1.0, 0.0], [0.0, -1.0]])
X2 = 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]])
X3 = 0.5 * np.array([[0.0, 1.0], [-1.0, 0.0]])


def _canon_sign(m):
    """Sign representative: first nonzero of (a,b,c,d) positive."""
    m = np.asarray(m, dtype=float)
    flat = m.reshape(m.shape[:-2] + (4,))
    # index of first entry with |.| > 0 in (a,b,c,d) order
    nz = np.abs(flat) > 0.0
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(flat, first[..., None], axis=-1)[..., 0]
    sgn = np.where(lead < 0.0, -1.0, 1.0)
    return m * sgn[..., None, None]


def _renorm_det(m):
    m = np.asarray(m, dtype=float)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    bad = np.abs(det - 1.0) > _DET_RENORM
    if np.any(bad):
        scale = np.where(bad, 1.0 / np.sqrt(det), 1.0)
        m = m * scale[..., None, None]
    return m


class GroupElement:
    """A 2x2 real unit-determinant matrix modulo sign.

    The stored representative has its first nonzero entry (row-major order)
    positive and |det - 1| <= 1e-12; construction renormalizes when the
    determinant has drifted beyond 1e-13.
    """

    __slots__ = ("m",)

    def __init__(self, m):
        m = np.array(m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError("GroupElement needs a 2x2 matrix")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det - 1.0) > _DET_TOL:
            raise ValueError("matrix is not unit-determinant: det=%r" % det)
        m = _canon_sign(_renorm_det(m))
        m.setflags(write=False)
        self.m = m

    @classmethod
    def identity(cls):
        return cls(np.eye(2))

    def __matmul__(self, other):
        return GroupElement(self.m @ other.m)

    def inv(self):
        a, b, c, d = self.m.ravel()
        return GroupElement(np.array([[d, -b], [-c, a]]))

    def trace(self):
        return float(self.m[0, 0] + self.m[1, 1])

    def close_to(self, other, tol=1e-10):
        """Equality mod sign in max-norm."""
        d1 = np.max(np.abs(self.m - other.m))
        d2 = np.max(np.abs(self.m + other.m))
        return min(d1, d2) <= tol

    def __repr__(self):
        return "GroupElement(%s)" % np.array2string(self.m, precision=6)


# ---------------------------------------------------------------------------
# models and coordinate views

def mobius_apply(g, z, model="disk"):
    """Apply the isometry g to a point of the chosen model.

    Parameters
    ----------
    g : GroupElement or (2,2) array
    z : complex scalar or array; open unit disk for model="disk",
        upper half-plane for model="half-plane".
    model : "disk" or "half-plane"

    The half-plane action is z -> (az+b)/(cz+d); the disk action is the
    conjugate by the Cayley transform z -> (z-i)/(z+i).
    """
    m = g.m if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    z = np.asarray(z, dtype=complex)
    if model == "half-plane":
        if np.any(z.imag <= 0):
            raise ValueError("point not in the open upper half-plane")
        a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
        return (a * z + b) / (c * z + d)
    if model == "disk":
        if np.any(np.abs(z) >= 1):
            raise ValueError("point not in the open unit disk")
        zh = 1j * (1 + z) / (1 - z)
        a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
        wh = (a * zh + b) / (c * zh + d)
        return (wh - 1j) / (wh + 1j)
    raise ValueError("unknown model %r" % (model,))


def geodesic_flow(g, t):
    """Flow time t along the geodesic generator: g -> g . diag(e^{t/2}, e^{-t/2})."""
    at = np.array([[np.exp(0.5 * t), 0.0], [0.0, np.exp(-0.5 * t)]])
    if isinstance(g, GroupElement):
        return GroupElement(g.m @ at)
    return _renorm_det(np.asarray(g, dtype=float) @ at)


def frame_coordinates(m):
    """Disk view (w, theta) of frame states.

    m : (..., 2, 2) array of unit-determinant matrices.
    Returns (w, theta): w complex in the unit disk is the Cayley image of the
    base point g.i; theta is the direction angle of the tangent vector at w.
    """
    m = np.asarray(m, dtype=float)
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    z = (a * 1j + b) / (c * 1j + d)
    w = (z - 1j) / (z + 1j)
    # tangent at i is i * g'(i); push through the Cayley derivative 2i/(z+i)^2
    gprime = 1.0 / (c * 1j + d) ** 2
    theta = np.angle((2j / (z + 1j) ** 2) * gprime * 1j)
    return w, theta


def from_frame(w, theta):
    """Inverse of frame_coordinates: (w, theta) -> (..., 2, 2) states."""
    w = np.asarray(w, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(w) >= 1):
        raise ValueError("base point not in the open unit disk")
    z = 1j * (1 + w) / (1 - w)
    x, y = z.real, z.imag
    sy = np.sqrt(y)
    g1 = np.zeros(np.broadcast(w, theta).shape + (2, 2))
    g1[..., 0, 0] = sy
    g1[..., 0, 1] = x / sy
    g1[..., 1, 1] = 1.0 / sy
    # direction carried by g1 at w; the k rotation below advances the
    # tangent angle by +phi, so solve for the defect accordingly
    dirc = (2j / (z + 1j) ** 2) * y * 1j
    phi = theta - np.angle(dirc)
    ch, sh = np.cos(0.5 * phi), np.sin(0.5 * phi)
    k = np.zeros_like(g1)
    k[..., 0, 0] = ch
    k[..., 0, 1] = sh
    k[..., 1, 0] = -sh
    k[..., 1, 1] = ch
    return _renorm_det(g1 @ k)


def disk_distance(w1, w2):
    """Hyperbolic distance between disk points (curvature -1)."""
    w1 = np.asarray(w1, dtype=complex)
    w2 = np.asarray(w2, dtype=complex)
    q = 2.0 * np.abs(w1 - w2) ** 2 / ((1 - np.abs(w1) ** 2) * (1 - np.abs(w2) ** 2))
    return np.arccosh(1.0 + q)


# ---------------------------------------------------------------------------
# group distance via the closed-form 2x2 logarithm

def _log_norm(m):
    """|log(M)| in the left-invariant metric, for M in SL(2,R), batch capable.

    Branches on the conjugacy class: hyperbolic (|tr|>2), elliptic (|tr|<2),
    parabolic/identity (|tr|=2).  For log = [[p,q],[r,-p]] the squared norm
    in the orthonormal frame {X1,X2,X3} is 4p^2 + 2q^2 + 2r^2.
    """
    m = np.asarray(m, dtype=float)
    tr = m[..., 0, 0] + m[..., 1, 1]
    sgn = np.where(tr < 0, -1.0, 1.0)   # log of the PSL(2,R) representative
    tau = 0.5 * tr * sgn
    b00 = m[..., 0, 0] * sgn - tau
    b01 = m[..., 0, 1] * sgn
    b10 = m[..., 1, 0] * sgn
    f = np.ones_like(tau)
    hyp = tau > 1.0 + 1e-12
    ell = tau < 1.0 - 1e-12
    s = np.arccosh(np.where(hyp, tau, 1.0))
    f = np.where(hyp, np.where(s > 0, s / np.sinh(np.where(s > 0, s, 1.0)), 1.0), f)
    se = np.arccos(np.clip(np.where(ell, tau, 1.0), -1.0, 1.0))
    f = np.where(ell, np.where(se > 0, se / np.sin(np.where(se > 0, se, 1.0)), 1.0), f)
    p, q, r = f * b00, f * b01, f * b10
    return np.sqrt(4.0 * p * p + 2.0 * q * q + 2.0 * r * r)


def group_distance(g, h):
    """Distance d(g,h) = |log(g^-1 h)| of the left-invariant metric.

    Exact along one-parameter subgroups; used as the distance surrogate for
    observable evaluation (tolerance 1e-8 scale).
    """
    gm = g.m if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    hm = h.m if isinstance(h, GroupElement) else np.asarray(h, dtype=float)
    a, b, c, d = gm[..., 0, 0], gm[..., 0, 1], gm[..., 1, 0], gm[..., 1, 1]
    ginv = np.empty_like(gm)
    ginv[..., 0, 0] = d
    ginv[..., 0, 1] = -b
    ginv[..., 1, 0] = -c
    ginv[..., 1, 1] = a
    return _log_norm(ginv @ hm)


# ---------------------------------------------------------------------------
# the Bolza group and its octagon

def _rot(phi):
    c, s = np.cos(0.5 * phi), np.sin(0.5 * phi)
    return np.array([[c, s], [-s, c]])


class FuchsianGroup:
    """Cocompact genus-2 group: four conjugated translations and inverses.

    generators[k] for k in 0..3 are g_k; generators[k+4] = g_k^{-1}.
    relation_word indexes into generators and multiplies to +-identity.
    """

    def __init__(self, generators, relation_word, systole):
        self.generators = generators
        self.relation_word = tuple(relation_word)
        self.systole = float(systole)
        self.gen_array = np.stack([g.m for g in generators])
        for g in generators:
            if abs(g.trace()) <= 2.0:
                raise ValueError("generator is not hyperbolic")
        rel = self.relation_product()
        err = min(np.max(np.abs(rel.m - np.eye(2))),
                  np.max(np.abs(rel.m + np.eye(2))))
        if err > 1e-10:
            raise ValueError("relation word fails: error %g" % err)

    def relation_product(self):
        out = GroupElement.identity()
        for idx in self.relation_word:
            out = out @ self.generators[idx]
        return out


class FundamentalDomain:
    """Regular hyperbolic octagon centered at the disk origin.

    vertices : 8 complex points, equal hyperbolic radius, angles pi/8 + k pi/4.
    side_pairing : side index -> (generator index, paired side index); side k
    is the geodesic from vertex k to vertex k+1 (mod 8).
    """

    def __init__(self, vertices, side_pairing, tol=1e-9, gen_array=None):
        self.vertices = np.asarray(vertices, dtype=complex)
        self.side_pairing = dict(side_pairing)
        self.tol = float(tol)
        self.gen_array = gen_array
        r = np.abs(self.vertices)
        if self.vertices.shape != (8,) or np.max(r) - np.min(r) > 1e-12:
            raise ValueError("vertices do not form a regular octagon")
        self.circumradius = float(disk_distance(self.vertices[0], 0.0))
        # apothem = distance from center to a side midpoint
        self.apothem = float(np.arccosh(1.0 + np.sqrt(2.0)))

    def area(self):
        """Numerical Gauss-Bonnet: (n-2)pi - sum of interior angles.

        The interior angle at each vertex is measured between the tangents of
        the two geodesic sides meeting there.
        """
        v = self.vertices
        total = 0.0
        for k in range(8):
            p = v[k]
            q1 = v[(k - 1) % 8]
            q2 = v[(k + 1) % 8]
            t1 = _geodesic_tangent(p, q1)
            t2 = _geodesic_tangent(p, q2)
            ang = np.angle(t1 / t2)
            total += abs(ang)
        return 6.0 * np.pi - total

    def contains(self, w, gen_array=None, tol=None):
        """Dirichlet test: no generator image of 0 is closer than 0 itself."""
        tol = self.tol if tol is None else tol
        gen_array = self.gen_array if gen_array is None else gen_array
        if gen_array is None:
            raise ValueError("domain has no pairing generators attached")
        w = np.asarray(w, dtype=complex)
        d0 = disk_distance(w, 0.0)
        ok = np.ones(w.shape, dtype=bool)
        for g in gen_array:
            img = _gen_image_of_origin(g)
            ok &= disk_distance(w, img) >= d0 - tol
        return ok


def _gen_image_of_origin(m):
    # disk image of the origin under the matrix m (origin <-> i upstairs)
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    z = (a * 1j + b) / (c * 1j + d)
    return (z - 1j) / (z + 1j)


def _geodesic_tangent(p, q):
    """Unit tangent at p of the hyperbolic geodesic from p to q (disk model).

    Obtained by Moebius-translating p to the origin, where geodesics are
    straight lines through 0.
    """
    u = (q - p) / (1 - np.conj(p) * q)
    return u / abs(u)


_BOLZA_CACHE = None


def bolza_group():
    """Construct the genus-2 group and its octagon Dirichlet domain.

    Generators are g_k = R_{k pi/4} T R_{-k pi/4}, k = 0..3, with T the
    hyperbolic translation of trace 2 + 2 sqrt(2) along the real axis.
    The construction is self-checked: relation word, traces, vertex radius,
    and the area 4*pi (genus 2 Gauss-Bonnet) are all verified numerically.
    """
    global _BOLZA_CACHE
    if _BOLZA_CACHE is not None:
        return _BOLZA_CACHE
    mu = 1.0 + np.sqrt(2.0) + np.sqrt(2.0 + 2.0 * np.sqrt(2.0))
    T = np.diag([mu, 1.0 / mu])   # trace mu + 1/mu = 2 + 2 sqrt(2)
    gens = []
    for k in range(4):
        r = _rot(k * np.pi / 4.0)
        gens.append(GroupElement(r @ T @ r.T))
    gens += [g.inv() for g in gens]
    # genus-2 relation g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3 = id
    relation = (0, 5, 2, 7, 4, 1, 6, 3)
    systole = 2.0 * np.arccosh(1.0 + np.sqrt(2.0))
    group = FuchsianGroup(gens, relation, systole)

    rv = 2.0 ** (-0.25)   # Euclidean vertex radius of the regular octagon
    vertices = rv * np.exp(1j * (np.pi / 8.0 + np.arange(8) * np.pi / 4.0))
    pairing = _derive_side_pairing(vertices, group.gen_array)
    domain = FundamentalDomain(vertices, pairing, gen_array=group.gen_array)
    area = domain.area()
    if abs(area - 4.0 * np.pi) > 1e-6:
        raise ValueError("octagon area check failed: %r" % area)
    _BOLZA_CACHE = (group, domain)
    return _BOLZA_CACHE


def _derive_side_pairing(vertices, gen_array):
    """Match each side to its partner by mapping side midpoints around."""
    mids = np.array([_geodesic_midpoint(vertices[k], vertices[(k + 1) % 8])
                     for k in range(8)])
    pairing = {}
    for j in range(8):
        found = False
        for gi, g in enumerate(gen_array):
            img = mobius_apply(g, mids[j], model="disk")
            hits = np.where(np.abs(mids - img) < 1e-9)[0]
            if hits.size == 1:
                pairing[j] = (gi, int(hits[0]))
                found = True
                break
        if not found:
            raise ValueError("side %d has no pairing generator" % j)
    # involution sanity
    for j, (gi, jp) in pairing.items():
        if pairing[jp][1] != j:
            raise ValueError("side pairing is not an involution")
    return pairing


def _geodesic_midpoint(p, q):
    """Hyperbolic midpoint of the geodesic segment [p, q] in the disk."""
    # translate p to 0, halve the radial coordinate hyperbolically, map back
    u = (q - p) / (1 - np.conj(p) * q)
    half = np.tanh(0.5 * np.arctanh(np.abs(u)))
    mid0 = half * u / np.abs(u)
    return (mid0 + p) / (1 + np.conj(p) * mid0)


# ---------------------------------------------------------------------------
# fundamental-domain reduction

_MAX_REDUCE_ITERS = 1000


def reduce_batch(m, group, domain):
    """Greedy distance-to-center descent, vectorized over (n,2,2) states.

    Each sweep multiplies every state by its best improving generator; the
    hyperbolic distance of the base point to the origin strictly decreases
    outside the domain, so termination is guaranteed.
    """
    m = np.array(m, dtype=float)
    single = (m.ndim == 2)
    if single:
        m = m[None]
    gen = group.gen_array
    w, _ = frame_coordinates(m)
    d = disk_distance(w, 0.0)
    for _ in range(_MAX_REDUCE_ITERS):
        cand = np.einsum("kab,nbc->knac", gen, m)
        wc, _ = frame_coordinates(cand)
        dc = disk_distance(wc, 0.0)
        best = dc.argmin(axis=0)
        dbest = dc[best, np.arange(m.shape[0])]
        improve = dbest < d - 1e-12
        if not improve.any():
            out = _canon_sign(_renorm_det(m))
            return out[0] if single else out
        idx = np.where(improve)[0]
        m[idx] = cand[best[idx], idx]
        d[idx] = dbest[idx]
    raise RuntimeError("fundamental-domain reduction did not terminate")


def reduce_to_domain(g, group, domain):
    """Reduce one state; returns (reduced GroupElement, witness word).

    The witness is a tuple of generator indices applied left-to-right:
    composing group.generators over it and left-multiplying the input
    reproduces the output within 1e-10.
    """
    m = g.m if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    m = np.array(m, dtype=float)
    gen = group.gen_array
    word = []
    w, _ = frame_coordinates(m)
    d = float(disk_distance(w, 0.0))
    for _ in range(_MAX_REDUCE_ITERS):
        cand = np.einsum("kab,bc->kac", gen, m)
        wc, _ = frame_coordinates(cand)
        dc = disk_distance(wc, 0.0)
        k = int(dc.argmin())
        if dc[k] >= d - 1e-12:
            return GroupElement(m), tuple(word)
        m = cand[k]
        d = float(dc[k])
        word.append(k)
    raise RuntimeError("fundamental-domain reduction did not terminate")


# ---------------------------------------------------------------------------
# contact-volume sampling

def sample_uniform(n, seed):
    """n independent contact-volume samples, as an (n,2,2) state array.

    The measure factorizes: hyperbolic area on the octagon (drawn by
    rejection from the hyperbolically-uniform disk of the octagon's
    circumscribed Euclidean radius) times uniform direction angle.
    Deterministic given the seed.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    group, domain = bolza_group()
    rng = np.random.Generator(np.random.Philox(seed))
    rv = 2.0 ** (-0.25)
    V = rv * rv / (1.0 - rv * rv)
    out_w = np.empty(n, dtype=complex)
    out_t = np.empty(n, dtype=float)
    filled = 0
    while filled < n:
        m = int((n - filled) * 2.8) + 16
        u = rng.random(m)
        r = np.sqrt(u * V / (1.0 + u * V))   # hyperbolic-uniform radius
        ang = rng.random(m) * 2.0 * np.pi
        w = r * np.exp(1j * ang)
        theta = rng.random(m) * 2.0 * np.pi
        ok = domain.contains(w, group.gen_array, tol=0.0)
        w, theta = w[ok], theta[ok]
        take = min(n - filled, w.size)
        out_w[filled:filled + take] = w[:take]
        out_t[filled:filled + take] = theta[:take]
        filled += take
    return _canon_sign(from_frame(out_w, out_t))


# ---------------------------------------------------------------------------
# smooth compactly-supported observables

def bump_profile(s):
    """phi(s) = exp(1 - 1/(1-s^2)) on |s|<1, zero outside; phi(0) = 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


class Observable:
    """Smooth bump on the quotient: phi(d(x, orbit of center)/r0).

    The orbit is truncated at word length `cutoff` (default 1: identity plus
    the eight generators); since r0 < systole/2 at most one orbit point can
    fall inside the support, which makes the symmetrized sum a genuine
    function on the quotient.
    """

    def __init__(self, center, r0, profile="bump", cutoff=1):
        group, domain = bolza_group()
        if not (0.0 < r0 < 0.5 * group.systole):
            raise ValueError("radius must satisfy 0 < r0 < systole/2 = %g"
                             % (0.5 * group.systole))
        if profile != "bump":
            raise ValueError("unknown profile %r" % (profile,))
        if cutoff != 1:
            raise ValueError("only word-length cutoff 1 is supported")
        self.center = center if isinstance(center, GroupElement) else GroupElement(center)
        self.r0 = float(r0)
        self.profile = profile
        self.cutoff = cutoff
        self._group, self._domain = group, domain
        # orbit points gamma . center, word length <= 1
        orbit = [self.center.m] + [g @ self.center.m for g in group.gen_array]
        self._orbit_inv = np.stack([np.array([[o[1, 1], -o[0, 1]],
                                              [-o[1, 0], o[0, 0]]]) for o in orbit])

    def __call__(self, m):
        """Evaluate on (...,2,2) states (or a GroupElement)."""
        if isinstance(m, GroupElement):
            return float(self(m.m[None])[0])
        m = np.asarray(m, dtype=float)
        single = (m.ndim == 2)
        if single:
            m = m[None]
        red = reduce_batch(m, self._group, self._domain)
        dmin = None
        for oi in self._orbit_inv:
            d = _log_norm(np.einsum("ab,nbc->nac", oi, red))
            dmin = d if dmin is None else np.minimum(dmin, d)
        val = bump_profile(dmin / self.r0)
        return val[0] if single else val


def smooth_observable(spec, x):
    """Evaluate the observable spec at the state x (scalar op form)."""
    return spec(x)
