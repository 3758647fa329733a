"""Rate extraction and statistical verdicts on decay curves.

Exponential fits are weighted least squares on log(value) with delta-method
weights (value/stderr)^2, bootstrap confidence intervals, and near-zero
points excluded (a point below 2 sigma cannot be logged meaningfully and
carries no rate information).  The same weights define the reported R^2, so
oscillatory curves are read through their envelope rather than through the
sign-changing dips.
"""

import numpy as np

from .geometry import (
    Observable, bolza_group, frame_coordinates, from_frame, reduce_batch,
    sample_uniform,
)


class DecayFit:
    """Fitted value ~ C e^{-beta t} over a window, with diagnostics."""

    __slots__ = ("beta", "C", "window", "r2", "ci", "n_used", "excluded")

    def __init__(self, beta, C, window, r2, ci, n_used, excluded):
        t0, t1 = window
        if not t0 < t1:
            raise ValueError("empty fit window")
        if n_used < 6:
            raise ValueError("fit needs >= 6 usable points, got %d" % n_used)
        if not C > 0:
            raise ValueError("prefactor must be positive")
        if not np.all(np.isfinite(ci)):
            raise ValueError("confidence interval must be finite")
        self.beta = float(beta)
        self.C = float(C)
        self.window = (float(t0), float(t1))
        self.r2 = float(r2)
        self.ci = (float(ci[0]), float(ci[1]))
        self.n_used = int(n_used)
        self.excluded = tuple(excluded)


def default_fit_window(curve, t_mix=1.0):
    """[first time past one mixing time, last time with value >= 10 stderr]."""
    t = curve.times
    ok = curve.values >= 10.0 * curve.stderrs
    upper = t[ok].max() if ok.any() else t[-1]
    lower = t[t >= t_mix].min() if np.any(t >= t_mix) else t[0]
    return float(lower), float(upper)


def fit_exponential(curve, window, n_boot=400, seed=12345):
    """Weighted log-linear fit of an exponential over the window.

    Points with value <= 2 stderr (including any negative ones) are excluded
    from the fit and reported in .excluded.  Standard errors propagate to
    log-space weights; the bootstrap resamples log-values from those errors.
    """
    t0, t1 = window
    mask = (curve.times >= t0 - 1e-12) & (curve.times <= t1 + 1e-12)
    usable = mask & (curve.values > 2.0 * curve.stderrs) & (curve.values > 0)
    excluded = [float(tt) for tt in curve.times[mask & ~usable]]
    t = curve.times[usable]
    v = curve.values[usable]
    s = curve.stderrs[usable]
    if t.size < 6:
        raise ValueError("fewer than 6 usable points in window [%g, %g] "
                         "(%d usable, %d excluded)" % (t0, t1, t.size, len(excluded)))
    y = np.log(v)
    sig = np.where(v > 0, s / np.maximum(v, 1e-300), 0.0)
    w = np.where(sig > 0, 1.0 / np.maximum(sig, 1e-15) ** 2, 1e30)
    W = w / w.sum()

    def wfit(yy):
        tbar = np.sum(W * t)
        ybar = np.sum(W * yy)
        stt = np.sum(W * (t - tbar) ** 2)
        slope = np.sum(W * (t - tbar) * (yy - ybar)) / stt
        return ybar - slope * tbar, slope

    a, b = wfit(y)
    beta = -b
    resid = y - (a + b * t)
    ybar = np.sum(W * y)
    denom = np.sum(W * (y - ybar) ** 2)
    r2 = 1.0 - np.sum(W * resid ** 2) / denom if denom > 0 else 1.0

    rng = np.random.Generator(np.random.Philox(key=np.array(
        [np.uint64(seed), np.uint64(t.size)], dtype=np.uint64)))
    betas = np.empty(n_boot)
    for i in range(n_boot):
        _, bb = wfit(y + sig * rng.standard_normal(t.size))
        betas[i] = -bb
    ci = (float(np.percentile(betas, 2.5)), float(np.percentile(betas, 97.5)))
    return DecayFit(beta, float(np.exp(a)), (t0, t1), r2, ci, t.size, excluded)


class RateSweep:
    """Per-nu fits plus the prefactor exponent K and the rate floor."""

    __slots__ = ("nu_list", "fits", "K_hat", "beta_floor", "partial")

    def __init__(self, nu_list, fits, K_hat, beta_floor, partial):
        nu = np.asarray(nu_list, dtype=float)
        if np.any(np.diff(nu) >= 0):
            raise ValueError("nu list must be strictly decreasing")
        if not np.isfinite(K_hat):
            raise ValueError("prefactor exponent must be finite")
        self.nu_list = tuple(nu)
        self.fits = tuple(fits)
        self.K_hat = float(K_hat)
        self.beta_floor = float(beta_floor)
        self.partial = bool(partial)


def prefactor_exponent(nu_list, fits, converged=None):
    """Regression of log C(nu) against log(1/nu) across a fitted sweep."""
    if len(nu_list) < 4:
        raise ValueError("need at least 4 nu values")
    if converged is None:
        converged = [True] * len(nu_list)
    partial = not all(converged)
    logs = np.log([f.C for f in fits])
    x = np.log(1.0 / np.asarray(nu_list, dtype=float))
    K_hat = np.polyfit(x, logs, 1)[0]
    betas = [f.beta for f in fits]
    return RateSweep(nu_list, fits, K_hat, min(betas), partial)


def envelope_checks(curve, nu, C_env, c_poinc=1.0, horizon_factor=1.0):
    """Enhanced-dissipation envelope and short-time bound, pointwise.

    (i)  value(t) <= C_env e^{-t/log(1/nu)} value(0)      (+2 sigma slack)
    (ii) value(t) <= e^{2 c_poinc nu t} value(0) for t <= horizon_factor*log(1/nu)
                                                          (+2 sigma slack)
    Violations are reported, never raised.  The report carries the smallest
    C_env that would make (i) pass, which is the quantity that separates an
    enhanced (nu-independent) rate from the bare diffusive one.
    """
    if not nu < 1.0 / np.e:
        raise ValueError("need nu < 1/e so log(1/nu) > 1")
    v0 = curve.values[0]
    if v0 < 0:
        raise ValueError("curve must start nonnegative")
    L = np.log(1.0 / nu)
    t = curve.times
    env = C_env * np.exp(-t / L) * v0
    viol_i = [float(tt) for tt in t[curve.values > env + 2.0 * curve.stderrs]]
    if v0 > 0:
        needed = (curve.values - 2.0 * curve.stderrs) * np.exp(t / L) / v0
        c_needed = float(max(1.0, needed[1:].max())) if t.size > 1 else 1.0
    else:
        # identically-zero data (constant initial datum): any envelope works
        c_needed = 1.0 if len(viol_i) == 0 else float("inf")

    short = t <= horizon_factor * L
    bound = np.exp(2.0 * c_poinc * nu * t[short]) * v0
    viol_ii = [float(tt) for tt in t[short][curve.values[short] > bound + 2.0 * curve.stderrs[short]]]
    return {
        "nu": float(nu),
        "C_env": float(C_env),
        "envelope_pass": len(viol_i) == 0,
        "envelope_violations": viol_i,
        "C_env_needed": c_needed,
        "short_time_pass": len(viol_ii) == 0,
        "short_time_violations": viol_ii,
        "short_time_horizon": float(horizon_factor * L),
    }


# ---------------------------------------------------------------------------
# Lyapunov exponents

class LyapunovEstimate:
    __slots__ = ("gamma0", "mean", "ci", "T", "system", "n_samples")

    def __init__(self, gamma0, mean, ci, T, system, n_samples):
        if not gamma0 > 0:
            raise ValueError("hyperbolic systems must report gamma0 > 0")
        self.gamma0 = float(gamma0)
        self.mean = float(mean)
        self.ci = (float(ci[0]), float(ci[1]))
        self.T = float(T)
        self.system = system
        self.n_samples = int(n_samples)


def _flow_step_tangent(dt):
    # frame-bundle tangent of the time-dt flow in the (X1, X2, X3) basis:
    # the flow direction is fixed and the transverse plane is mixed
    # hyperbolically (curvature -1).
    c, s = np.cosh(dt), np.sinh(dt)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, -s, c]])


def lyapunov_estimate(system, T, n_samples, seed=0, dt=0.05):
    """Top Lyapunov exponent by QR-reorthonormalized power iteration.

    system = "bolza-flow": the geodesic-flow tangent cocycle in the moving
    frame (unstable direction is one-dimensional, so the top exponent equals
    the unstable log-determinant rate).  system = TorusMap: the tangent maps
    DT along orbits.  A burn-in stretch aligns the tracked vector with the
    expanding direction before log accumulation starts; without it the
    finite-horizon estimate carries an O(1/T) bias from the start vector's
    non-expanding components.  Returns the sample minimum as the
    conservative gamma0 surrogate, plus the mean and its 95% interval.
    """
    rng = np.random.Generator(np.random.Philox(key=np.array(
        [np.uint64(seed), np.uint64(0x17AB)], dtype=np.uint64)))
    if system == "bolza-flow":
        if T < 20:
            raise ValueError("need T >= 20 for the flow")
        n_steps = int(round(T / dt))
        burn = min(n_steps // 2, int(round(10.0 / dt)))
        J = _flow_step_tangent(dt)
        exps = np.empty(n_samples)
        for i in range(n_samples):
            # generic start: a fixed vector could sit inside the invariant
            # flow+stable plane and miss the expanding direction entirely
            q = rng.standard_normal((3, 1))
            q /= np.linalg.norm(q)
            acc = 0.0
            for j in range(n_steps):
                q = J @ q
                r = np.linalg.norm(q)
                if j >= burn:
                    acc += np.log(r)
                q /= r
            exps[i] = acc / ((n_steps - burn) * dt)
        tag = "bolza-flow"
    else:
        tmap = system
        if T < 1000:
            raise ValueError("need >= 1000 steps for a map")
        n_steps = int(T)
        burn = min(n_steps // 2, 200)
        xs = rng.random((n_samples, 2))
        exps = np.empty(n_samples)
        for i in range(n_samples):
            x = xs[i]
            q = rng.standard_normal((2, 1))
            q /= np.linalg.norm(q)
            acc = 0.0
            for j in range(n_steps):
                q = tmap.jacobian(x) @ q
                r = np.linalg.norm(q)
                if j >= burn:
                    acc += np.log(r)
                q /= r
                x = tmap.apply(x)
            exps[i] = acc / (n_steps - burn)
        tag = "torus-map"
    mean = float(np.mean(exps))
    half = 1.96 * np.std(exps, ddof=1) / np.sqrt(n_samples) if n_samples > 1 else 0.0
    return LyapunovEstimate(float(np.min(exps)), mean,
                            (mean - half, mean + half), T, tag, n_samples)


# ---------------------------------------------------------------------------
# equidistribution diagnostics

def uniformity_chi_square(states, n_position_sectors=8, n_theta_bins=8):
    """Chi-square against the product cell partition of the quotient.

    Cells are (position angle sector) x (direction bin); the octagon's
    8-fold rotational symmetry makes every cell probability exactly
    1/(sectors*bins) when sectors divides 8.  Returns (statistic, dof).
    """
    if 8 % n_position_sectors != 0:
        raise ValueError("position sectors must divide 8")
    w, theta = frame_coordinates(states)
    si = np.floor(np.mod(np.angle(w), 2 * np.pi) / (2 * np.pi / n_position_sectors))
    ti = np.floor(np.mod(theta, 2 * np.pi) / (2 * np.pi / n_theta_bins))
    si = np.clip(si.astype(int), 0, n_position_sectors - 1)
    ti = np.clip(ti.astype(int), 0, n_theta_bins - 1)
    counts = np.bincount(si * n_theta_bins + ti,
                         minlength=n_position_sectors * n_theta_bins)
    n = states.shape[0]
    expected = n / (n_position_sectors * n_theta_bins)
    stat = float(np.sum((counts - expected) ** 2 / expected))
    return stat, n_position_sectors * n_theta_bins - 1


class ObservableDictionary:
    """Fixed observable battery with frozen invariant-measure integrals."""

    def __init__(self, names, funcs, integrals):
        if not (len(names) == len(funcs) == len(integrals)):
            raise ValueError("dictionary pieces disagree in length")
        self.names = tuple(names)
        self.funcs = tuple(funcs)
        self.integrals = np.asarray(integrals, dtype=float)

    def __len__(self):
        return len(self.names)

    def evaluate(self, states):
        """Per-observable (empirical mean, stderr of the mean)."""
        means = np.empty(len(self))
        errs = np.empty(len(self))
        for i, f in enumerate(self.funcs):
            vals = f(states)
            means[i] = np.mean(vals)
            errs[i] = (np.std(vals, ddof=1) / np.sqrt(vals.size)
                       if vals.size > 1 else 0.0)
        return means, errs


def build_dictionary(integrals=None, calibration_n=2_000_000, seed=20260815):
    """The 20-observable battery used by the discrepancy statistic.

    8 quotient bumps at mid-radius centers, 4 direction harmonics, 4 radial
    moments, 4 mixed position-direction products.  Integrals are MC-frozen;
    pass the frozen array to skip the calibration run.
    """
    names, funcs = [], []
    for k in range(8):
        w0 = 0.35 * np.exp(1j * (k * np.pi / 4.0))
        center = from_frame(np.array([w0]), np.array([k * np.pi / 4.0]))[0]
        obs = Observable(center, 1.0)
        names.append("bump%d" % k)
        funcs.append(obs)

    def theta_mode(mult, phase):
        def f(states):
            _, th = frame_coordinates(states)
            return np.cos(mult * th - phase)
        return f

    for mult, phase, nm in ((1, 0.0, "cos_t"), (1, np.pi / 2, "sin_t"),
                            (2, 0.0, "cos_2t"), (2, np.pi / 2, "sin_2t")):
        names.append(nm)
        funcs.append(theta_mode(mult, phase))

    def radial_power(p):
        def f(states):
            w, _ = frame_coordinates(states)
            return np.abs(w) ** (2 * p)
        return f

    for p in (1, 2, 3, 4):
        names.append("r%d" % p)
        funcs.append(radial_power(p))

    def mixed(fun, nm):
        def f(states):
            w, th = frame_coordinates(states)
            return fun(w, th)
        f.__name__ = nm
        return f

    names += ["rew_cos", "imw_sin", "r2_cos", "rew2_sin"]
    funcs += [mixed(lambda w, t: w.real * np.cos(t), "rew_cos"),
              mixed(lambda w, t: w.imag * np.sin(t), "imw_sin"),
              mixed(lambda w, t: np.abs(w) ** 2 * np.cos(t), "r2_cos"),
              mixed(lambda w, t: (w ** 2).real * np.sin(t), "rew2_sin")]

    if integrals is None:
        ref = sample_uniform(calibration_n, seed)
        integrals = [float(np.mean(f(ref))) for f in funcs]
    return ObservableDictionary(names, funcs, integrals)


def discrepancy(ens, dictionary):
    """Max deviation of empirical means from the frozen integrals.

    The ensemble is reduced to the fundamental domain before evaluation
    (evaluation views live there); returns the max-abs deviation over the
    dictionary.
    """
    states = ens.states if hasattr(ens, "states") else np.asarray(ens)
    if states.ndim != 3 or states.shape[0] == 0:
        raise ValueError("need a nonempty (n,2,2) ensemble")
    group, domain = bolza_group()
    red = reduce_batch(states, group, domain)
    means, _ = dictionary.evaluate(red)
    return float(np.max(np.abs(means - dictionary.integrals)))


def discrepancy_report(ens, dictionary):
    """Per-observable deviations and standard errors (diagnostic form)."""
    states = ens.states if hasattr(ens, "states") else np.asarray(ens)
    group, domain = bolza_group()
    red = reduce_batch(states, group, domain)
    means, errs = dictionary.evaluate(red)
    dev = np.abs(means - dictionary.integrals)
    return {"names": dictionary.names, "deviations": dev, "stderrs": errs,
            "max_deviation": float(dev.max()),
            "argmax": dictionary.names[int(dev.argmax())]}
