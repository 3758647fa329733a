"""Monte Carlo advection-diffusion on the hyperbolic frame bundle.

The backward stochastic characteristic of du/dt = -Xu + nu*Lap(u) is the
group-valued SDE step g -> g . exp(-dt X1 + sqrt(2 nu dt) (xi . X)); averaging
an observable over endpoints gives the pointwise solution, and pairing two
independent paths per base point gives an unbiased estimator of the squared
L2 distance from equilibrium.  All randomness is counter-keyed by
(seed, path slot, chunk, step) so results never depend on worker count or on
how the evolution is split across snapshot times.
"""

import numpy as np
from concurrent.futures import ThreadPoolExecutor

from .geometry import (
    GroupElement, X1, X2, X3, _renorm_det, _canon_sign,
    from_frame, geodesic_flow, sample_uniform as _sample_states, bolza_group,
)

_CHUNK = 4096   # fixed chunk size: the unit of noise keying and reduction


class DiffusionConfig:
    """Diffusion strength, step size and the exponential-increment scheme.

    dt must satisfy dt <= min(0.05, 0.1/sqrt(nu)) (stability guard); the
    default is min(0.02, 0.1/sqrt(nu)).  Noise streams are counter-based per
    fixed-size particle chunk, so evolution is reproducible and independent
    of scheduling.
    """

    __slots__ = ("nu", "dt", "scheme")

    def __init__(self, nu, dt=None, scheme="exponential-euler"):
        if nu < 0:
            raise ValueError("nu must be >= 0")
        if scheme != "exponential-euler":
            raise ValueError("unknown scheme %r" % (scheme,))
        cap = min(0.05, 0.1 / np.sqrt(nu)) if nu > 0 else 0.05
        if dt is None:
            dt = min(0.02, 0.1 / np.sqrt(nu)) if nu > 0 else 0.02
        if not (0 < dt <= cap + 1e-15):
            raise ValueError("dt=%g violates the guard dt <= %g" % (dt, cap))
        self.nu = float(nu)
        self.dt = float(dt)
        self.scheme = scheme


def _chunk_normals(seed, slot, chunk, step, n):
    """(n,3) standard normals, a pure function of the key tuple."""
    if not (0 <= slot < 1 << 8 and 0 <= chunk < 1 << 24 and 0 <= step < 1 << 32):
        raise ValueError("noise key out of range")
    key = np.array([np.uint64(seed) ^ np.uint64(0x9E3779B97F4A7C15),
                    np.uint64((slot << 56) | (chunk << 32) | step)],
                   dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.standard_normal((n, 3))


def _expm_traceless(a):
    """exp of (...,2,2) traceless matrices via the Cayley-Hamilton closed form."""
    det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    s2 = -det            # a@a = s2 * I
    s = np.sqrt(np.abs(s2))
    big = s > 1e-6
    coshs = np.where(s2 >= 0, np.cosh(s), np.cos(s))
    sden = np.where(big, s, 1.0)
    ratio = np.where(big,
                     np.where(s2 >= 0, np.sinh(sden), np.sin(sden)) / sden,
                     1.0 + s2 / 6.0 + s2 * s2 / 120.0)
    eye = np.eye(2)
    return coshs[..., None, None] * eye + ratio[..., None, None] * a


def _step_batch(m, cfg, xi):
    # one exponential-increment step for a (n,2,2) block with (n,3) noise
    amp = np.sqrt(2.0 * cfg.nu * cfg.dt)
    a = (-cfg.dt) * X1 + amp * (xi[:, 0, None, None] * X1
                                + xi[:, 1, None, None] * X2
                                + xi[:, 2, None, None] * X3)
    return _renorm_det(m @ _expm_traceless(a))


def sde_step(g, cfg, noise):
    """One step of the backward characteristic; exact flow when nu = 0.

    Returns g . exp(-dt X1 + sqrt(2 nu dt)(xi1 X1 + xi2 X2 + xi3 X3)).
    For nu = 0 this is literally geodesic_flow(g, -dt), bit for bit.
    """
    if cfg.nu == 0.0:
        return geodesic_flow(g, -cfg.dt)
    xi = np.asarray(noise, dtype=float)
    if xi.shape != (3,) or not np.all(np.isfinite(xi)):
        raise ValueError("noise must be 3 finite reals")
    if isinstance(g, GroupElement):
        return GroupElement(_step_batch(g.m[None], cfg, xi[None])[0])
    return _step_batch(np.asarray(g, float)[None], cfg, xi[None])[0]


class ParticleEnsemble:
    """A block of frame states with time, config and seeding metadata.

    states is an (n,2,2) read-only array; step_index counts SDE steps taken
    since time 0, which (with the seed) fully determines the noise, so
    evolving 0 -> 8 directly or through intermediate snapshots yields
    bit-identical states.
    """

    __slots__ = ("states", "time", "config", "seed", "tag", "step_index", "slot")

    def __init__(self, states, time, config, seed, tag="", step_index=0, slot=0):
        states = _canon_sign(_renorm_det(np.array(states, dtype=float)))
        if states.ndim != 3 or states.shape[1:] != (2, 2):
            raise ValueError("states must be (n,2,2)")
        states.setflags(write=False)
        self.states = states
        self.time = float(time)
        self.config = config
        self.seed = int(seed)
        self.tag = tag
        self.step_index = int(step_index)
        self.slot = int(slot)

    @property
    def n(self):
        return self.states.shape[0]

    def __getitem__(self, i):
        return GroupElement(self.states[i])


def sample_ensemble(n, seed, config=None, tag="uniform"):
    """Contact-volume uniform ensemble at time 0."""
    cfg = config if config is not None else DiffusionConfig(0.0)
    return ParticleEnsemble(_sample_states(n, seed), 0.0, cfg, seed, tag=tag)


def sample_neighborhood(n, seed, w_radius=0.1, theta_center=np.pi / 5.0,
                        theta_halfwidth=0.1, config=None):
    """Ensemble drawn uniformly (contact volume) from a small frame box.

    Base points fill the hyperbolic disk of Euclidean radius w_radius about
    the origin; direction angles fill [theta_center +- theta_halfwidth].
    The disk must sit inside the fundamental octagon.
    """
    if not 0 < w_radius < 2.0 ** (-0.25):
        raise ValueError("w_radius must sit inside the fundamental octagon")
    if not 0 < theta_halfwidth <= np.pi:
        raise ValueError("theta_halfwidth out of range")
    cfg = config if config is not None else DiffusionConfig(0.0)
    rng = np.random.Generator(np.random.Philox(seed))
    V = w_radius ** 2 / (1.0 - w_radius ** 2)
    u = rng.random(n)
    r = np.sqrt(u * V / (1.0 + u * V))      # hyperbolic-area uniform radius
    ang = rng.random(n) * 2.0 * np.pi
    theta = theta_center + (2.0 * rng.random(n) - 1.0) * theta_halfwidth
    states = from_frame(r * np.exp(1j * ang), theta)
    return ParticleEnsemble(states, 0.0, cfg, seed, tag="neighborhood")


def _evolve_block(states, cfg, seed, slot, chunk0, step0, n_steps):
    # advance a contiguous block of whole chunks by n_steps
    out = np.array(states)
    nblk = out.shape[0]
    for s in range(n_steps):
        pos = 0
        while pos < nblk:
            cn = min(_CHUNK, nblk - pos)
            xi = _chunk_normals(seed, slot, chunk0 + pos // _CHUNK, step0 + s, cn)
            out[pos:pos + cn] = _step_batch(out[pos:pos + cn], cfg, xi)
            pos += cn
    return out


def evolve_ensemble(ens, t_target, workers=1):
    """Advance every particle to t_target by repeated SDE steps.

    States stay in the universal cover (no domain reduction) for exactness;
    reduction happens only in observable evaluation and at export time.
    """
    if t_target < ens.time - 1e-12:
        raise ValueError("t_target %g is before ensemble time %g" % (t_target, ens.time))
    cfg = ens.config
    delta = t_target - ens.time
    n_steps = int(round(delta / cfg.dt))
    if abs(n_steps * cfg.dt - delta) > 1e-9:
        raise ValueError("t_target - time must be a multiple of dt=%g" % cfg.dt)
    if n_steps > 10 ** 8:
        raise ValueError("step count overflow: %d" % n_steps)
    if n_steps == 0:
        return ens

    if cfg.nu == 0.0:
        # exact per-step flow; loop keeps step counting identical to nu>0
        out = np.array(ens.states)
        for _ in range(n_steps):
            out = geodesic_flow(out, -cfg.dt)
    else:
        nchunks = (ens.n + _CHUNK - 1) // _CHUNK
        if workers <= 1 or nchunks == 1:
            out = _evolve_block(ens.states, cfg, ens.seed, ens.slot, 0,
                                ens.step_index, n_steps)
        else:
            # whole chunks per task: noise keys depend only on chunk index
            tasks = []
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for c0 in range(0, nchunks, 4):
                    lo, hi = c0 * _CHUNK, min((c0 + 4) * _CHUNK, ens.n)
                    tasks.append(pool.submit(_evolve_block, ens.states[lo:hi],
                                             cfg, ens.seed, ens.slot, c0,
                                             ens.step_index, n_steps))
            out = np.concatenate([t.result() for t in tasks], axis=0)
    return ParticleEnsemble(out, t_target, cfg, ens.seed, tag=ens.tag,
                            step_index=ens.step_index + n_steps, slot=ens.slot)


class DecayCurve:
    """Sampled curve t -> value with per-point standard errors."""

    __slots__ = ("times", "values", "stderrs")

    def __init__(self, times, values, stderrs):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        stderrs = np.asarray(stderrs, dtype=float)
        if not (times.ndim == 1 and times.shape == values.shape == stderrs.shape):
            raise ValueError("times/values/stderrs must be equal-length 1d")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(stderrs)) or np.any(stderrs < 0):
            raise ValueError("standard errors must be finite and nonnegative")
        self.times = times
        self.values = values
        self.stderrs = stderrs

    def __len__(self):
        return self.times.size


def pointwise_solution(u0, x, t, cfg, n_paths, seed=0):
    """Feynman-Kac estimate of the solution at (t, x).

    Runs n_paths independent backward characteristics from x and averages
    u0 at the endpoints; returns (estimate, stderr).
    """
    if n_paths < 2:
        raise ValueError("need n_paths >= 2")
    if t < 0:
        raise ValueError("need t >= 0")
    xm = x.m if isinstance(x, GroupElement) else np.asarray(x, dtype=float)
    states = np.broadcast_to(xm, (n_paths, 2, 2))
    ens = ParticleEnsemble(states, 0.0, cfg, seed, tag="pointwise")
    ens = evolve_ensemble(ens, t)
    vals = u0(ens.states)
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / np.sqrt(n_paths))


def l2_decay_curve(u0, times, cfg, n_base, n_paths, seed=0, ubar=None,
                   workers=1, n_boot=200):
    """Unbiased squared-L2-distance-from-mean curve by paired paths.

    For each time t, n_base base points are drawn from the invariant measure
    and each is evolved along n_paths (an even number, default 2) mutually
    independent diffusion paths; the estimator averages products of u0 over
    disjoint path pairs minus ubar^2.  ubar is the exact (or pre-estimated
    and frozen) mean of u0, supplied by the caller.  Values near zero may go
    slightly negative; no clamping is applied.  Standard errors are bootstrap
    over base points.
    """
    if ubar is None:
        raise ValueError("ubar (the mean of u0) must be supplied")
    if n_paths < 2 or n_paths % 2:
        raise ValueError("n_paths must be even and >= 2")
    times = np.asarray(times, dtype=float)
    base = _sample_states(n_base, seed)
    v0 = u0(base)
    if np.all(v0 == v0[0]):
        # constant input: the distance from the mean is exactly zero
        return DecayCurve(times, np.zeros_like(times), np.zeros_like(times))

    copies = [ParticleEnsemble(base, 0.0, cfg, seed, tag="l2pair", slot=p + 1)
              for p in range(n_paths)]
    brng = np.random.Generator(np.random.Philox(key=np.array(
        [np.uint64(seed), np.uint64(0xB007)], dtype=np.uint64)))
    values, errs = [], []
    for t in times:
        copies = [evolve_ensemble(c, t, workers=workers) for c in copies]
        evals = np.stack([u0(c.states) for c in copies])
        prods = np.mean([evals[2 * j] * evals[2 * j + 1]
                         for j in range(n_paths // 2)], axis=0)
        values.append(np.mean(prods) - ubar ** 2)
        idx = brng.integers(0, n_base, size=(n_boot, n_base))
        boot = np.mean(prods[idx], axis=1) - ubar ** 2
        errs.append(np.std(boot, ddof=1))
    return DecayCurve(times, np.array(values), np.array(errs))


def correlation_curve(f, g, times, n_samples, seed=0):
    """Mixing correlation of the deterministic flow.

    Estimates int f(x) g(flow_t x) dm - (int f)(int g) at each requested time
    from one uniform sample; the means of f and g are estimated once from
    that same sample (so g = const gives exact cancellation).
    """
    times = np.asarray(times, dtype=float)
    base = _sample_states(n_samples, seed)
    fvals = f(base)
    fbar = float(np.mean(fvals))
    values, errs = [], []
    for t in times:
        moved = geodesic_flow(base, t)
        gvals = g(moved)
        gbar = float(np.mean(gvals))
        h = fvals * gvals - fbar * gbar
        values.append(np.mean(h))
        errs.append(np.std(fvals * gvals, ddof=1) / np.sqrt(n_samples))
    return DecayCurve(times, np.array(values), np.array(errs))
