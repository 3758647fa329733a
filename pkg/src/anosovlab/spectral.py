"""Dense Fourier-Galerkin spectral engine on the 2-torus.

Two operator families on the mode lattice {|k|_inf <= N}:

* noisy transfer operators L_nu = e^{nu Lap} . (composition by T) for
  hyperbolic torus maps T(x) = Ax + eps psi(x), the discrete-time stand-in
  for a hyperbolic flow; columns are assembled by FFT of e^{2 pi i m.T(x)}
  on a fine grid, with the heat multiplier applied on the output mode;
* advection-diffusion generators P_nu = v.grad - nu Lap for divergence-free
  trigonometric velocity fields, the comparison testbed whose shear member
  shows the nu^{1/2} enhanced-dissipation scaling instead of a nu-uniform gap.

Spectra are computed densely; truncation stability is checked by recomputing
at 2N (iterative eigensolver above the dense size limit).
"""

import numpy as np
from concurrent.futures import ThreadPoolExecutor

_TWO_PI = 2.0 * np.pi


def _eval_terms(terms, x1, x2, deriv=False):
    """Evaluate a trig displacement field (and optionally its Jacobian).

    terms: list of (h, w, kind) with h an integer wavevector, w a real
    2-vector amplitude, kind 'sin' or 'cos'.  psi(x) = sum w * f(2 pi h.x).
    """
    psi1 = np.zeros_like(x1)
    psi2 = np.zeros_like(x1)
    jac = np.zeros((2, 2) + x1.shape) if deriv else None
    for h, w, kind in terms:
        arg = _TWO_PI * (h[0] * x1 + h[1] * x2)
        if kind == "sin":
            f, fp = np.sin(arg), np.cos(arg)
        elif kind == "cos":
            f, fp = np.cos(arg), -np.sin(arg)
        else:
            raise ValueError("unknown term kind %r" % (kind,))
        psi1 += w[0] * f
        psi2 += w[1] * f
        if deriv:
            for i, wi in enumerate(w):
                for j, hj in enumerate(h):
                    jac[i, j] += wi * _TWO_PI * hj * fp
    return (psi1, psi2, jac) if deriv else (psi1, psi2)


class TorusMap:
    """T(x) = A x + eps psi(x) mod 1 with certified invertibility.

    A: integer 2x2, det 1, |trace| > 2.  psi: trig polynomial displacement
    (list of (h, w, kind) terms).  Construction checks the diffeomorphism
    certificate sup ||eps Dpsi||_inf < 1 / ||A^{-1}||_inf (induced infinity
    norms, the Jacobian sup taken over a 128x128 grid) and strict invariance
    of a constant cone field around the unstable direction over a 64x64 grid.
    """

    def __init__(self, A, eps, psi_terms=(), cone_halfwidth=0.5):
        A = np.asarray(A)
        if A.shape != (2, 2) or not np.issubdtype(A.dtype, np.integer):
            raise ValueError("A must be an integer 2x2 matrix")
        if int(round(np.linalg.det(A))) != 1:
            raise ValueError("A must have determinant 1")
        if abs(int(A[0, 0] + A[1, 1])) <= 2:
            raise ValueError("A must be hyperbolic: |trace| > 2")
        if eps < 0:
            raise ValueError("eps must be >= 0")
        self.A = A.astype(np.int64)
        self.eps = float(eps)
        self.psi_terms = [((int(h[0]), int(h[1])),
                           (float(w[0]), float(w[1])), kind)
                          for h, w, kind in psi_terms]
        self.Ainv = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]],
                             dtype=np.int64)          # exact, det 1
        if self.eps > 0 and self.psi_terms:
            self._check_diffeo()
            self._check_cone(cone_halfwidth)

    def _check_diffeo(self):
        grid = np.arange(128) / 128.0
        x1, x2 = np.meshgrid(grid, grid, indexing="ij")
        _, _, jac = _eval_terms(self.psi_terms, x1, x2, deriv=True)
        row_sums = np.abs(jac).sum(axis=1)            # (2, grid...) per row
        sup = self.eps * row_sums.max(axis=0).max()
        bound = 1.0 / np.abs(self.Ainv).sum(axis=1).max()
        if not sup < bound:
            raise ValueError("diffeomorphism certificate fails: "
                             "%g >= %g" % (sup, bound))
        self.certificate_ratio = sup / bound

    def _check_cone(self, gamma):
        evals, evecs = np.linalg.eig(self.A.astype(float))
        order = np.argsort(np.abs(evals))[::-1]
        B = evecs[:, order]                           # unstable column first
        Binv = np.linalg.inv(B)
        grid = np.arange(64) / 64.0
        x1, x2 = np.meshgrid(grid, grid, indexing="ij")
        _, _, jac = _eval_terms(self.psi_terms, x1, x2, deriv=True)
        worst_slope, worst_expand = 0.0, np.inf
        for s in (+gamma, -gamma):
            v = B @ np.array([1.0, s])
            img1 = (self.A @ v)[:, None, None] + self.eps * np.einsum(
                "ijkl,j->ikl", jac, v)
            u = Binv[0, 0] * img1[0] + Binv[0, 1] * img1[1]
            w = Binv[1, 0] * img1[0] + Binv[1, 1] * img1[1]
            worst_slope = max(worst_slope, np.max(np.abs(w) / np.abs(u)))
            worst_expand = min(worst_expand, np.min(np.abs(u)))
        if not (worst_slope < gamma and worst_expand > 1.0):
            raise ValueError("cone field is not strictly invariant "
                             "(slope %g, expansion %g)" % (worst_slope, worst_expand))

    def apply(self, x):
        """T on points, x shape (...,2), values mod 1."""
        x = np.asarray(x, dtype=float)
        psi1, psi2 = _eval_terms(self.psi_terms, x[..., 0], x[..., 1])
        out = x @ self.A.T.astype(float)
        out[..., 0] += self.eps * psi1
        out[..., 1] += self.eps * psi2
        return np.mod(out, 1.0)

    def jacobian(self, x):
        """DT at points, shape (...,2,2)."""
        x = np.asarray(x, dtype=float)
        _, _, jac = _eval_terms(self.psi_terms, x[..., 0], x[..., 1], deriv=True)
        out = np.empty(x.shape[:-1] + (2, 2))
        for i in range(2):
            for j in range(2):
                out[..., i, j] = self.A[i, j] + self.eps * jac[i, j]
        return out


class TruncatedOperator:
    """Dense matrix on the mode lattice {|k|_inf <= N}, row-major over
    (k1, k2) with k1 the slow index, each running -N..N."""

    __slots__ = ("N", "matrix", "kind", "nu")

    def __init__(self, N, matrix, kind, nu):
        if kind not in ("transfer", "generator"):
            raise ValueError("kind must be 'transfer' or 'generator'")
        D = (2 * N + 1) ** 2
        if matrix.shape != (D, D):
            raise ValueError("matrix shape %r does not match N=%d" % (matrix.shape, N))
        self.N = int(N)
        self.matrix = matrix
        self.kind = kind
        self.nu = float(nu)

    def mode_index(self, k1, k2):
        if abs(k1) > self.N or abs(k2) > self.N:
            raise ValueError("mode out of range")
        D = 2 * self.N + 1
        return (k1 + self.N) * D + (k2 + self.N)

    def modes(self):
        ks = np.arange(-self.N, self.N + 1)
        K1, K2 = np.meshgrid(ks, ks, indexing="ij")
        return K1.ravel(), K2.ravel()


def operator_norm_estimate(M, iters=60):
    """2-norm by deterministic power iteration on M*M."""
    n = M.shape[0]
    rng = np.random.Generator(np.random.Philox(key=np.array([7, n], dtype=np.uint64)))
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    Mh = M.conj().T
    for _ in range(iters):
        w = Mh @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
    return float(np.sqrt(np.linalg.norm(Mh @ (M @ v))))


def build_transfer_operator(tmap, nu, N, fine_grid=None, workers=1):
    """Matrix of L_nu = e^{nu Lap} compose-by-T on modes |k|_inf <= N.

    Column m is the Fourier transform of e^{2 pi i m.T(x)} sampled on a
    fine_grid^2 lattice (default 8N, the anti-aliasing minimum), scaled by
    the heat multiplier e^{-4 pi^2 nu |k|^2} on the output mode k.  The
    mode-0 column is the analytically exact constant column e_0.  For
    eps = 0 the assembly is the exact single-entry-per-column delta rule.
    """
    if N < 4:
        raise ValueError("need N >= 4")
    if nu < 0:
        raise ValueError("nu must be >= 0")
    P = 8 * N if fine_grid is None else int(fine_grid)
    if P < 8 * N:
        raise ValueError("fine grid %d is too coarse for N=%d (need >= %d)"
                         % (P, N, 8 * N))
    D = 2 * N + 1
    ks = np.arange(-N, N + 1)
    K1, K2 = np.meshgrid(ks, ks, indexing="ij")
    damp = np.exp(-4.0 * np.pi ** 2 * nu * (K1 ** 2 + K2 ** 2)).ravel()
    M = np.zeros((D * D, D * D), dtype=complex)
    AT = tmap.A.T

    if tmap.eps == 0.0 or not tmap.psi_terms:
        for i1, m1 in enumerate(ks):
            for i2, m2 in enumerate(ks):
                k1, k2 = AT[0, 0] * m1 + AT[0, 1] * m2, AT[1, 0] * m1 + AT[1, 1] * m2
                if abs(k1) <= N and abs(k2) <= N:
                    row = (k1 + N) * D + (k2 + N)
                    M[row, i1 * D + i2] = damp[row]
        return TruncatedOperator(N, M, "transfer", nu)

    grid = np.arange(P) / P
    x1, x2 = np.meshgrid(grid, grid, indexing="ij")
    psi1, psi2 = _eval_terms(tmap.psi_terms, x1, x2)
    j1base = np.mod(K1.ravel()[:, None], P)
    j2base = np.mod(K2.ravel()[:, None], P)

    def fill(i1_range):
        for i1 in i1_range:
            m1 = ks[i1]
            for i2, m2 in enumerate(ks):
                if m1 == 0 and m2 == 0:
                    continue
                V = np.exp((2j * np.pi * tmap.eps) * (m1 * psi1 + m2 * psi2))
                Vh = np.fft.fft2(V)
                Vh *= 1.0 / (P * P)
                a1 = AT[0, 0] * m1 + AT[0, 1] * m2
                a2 = AT[1, 0] * m1 + AT[1, 1] * m2
                j1 = (K1.ravel() - a1) % P
                j2 = (K2.ravel() - a2) % P
                M[:, i1 * D + i2] = damp * Vh[j1, j2]

    if workers <= 1:
        fill(range(D))
    else:
        blocks = np.array_split(np.arange(D), workers * 2)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, blocks))
    M[:, (N * D) + N] = 0.0
    M[(N * D) + N, (N * D) + N] = 1.0   # exact constant column
    return TruncatedOperator(N, M, "transfer", nu)


def apply_composition_heat(tmap, nu, coeffs, N, oversample=16):
    """Fine-grid oracle: pointwise composition then heat, back to modes.

    Evaluates u(T(x)) on an oversample*N grid from the given mode
    coefficients, transforms, applies the heat multiplier, and restricts to
    the lattice.  Used to validate the assembled matrix action.
    """
    P = oversample * N
    D = 2 * N + 1
    grid = np.arange(P) / P
    x = np.stack(np.meshgrid(grid, grid, indexing="ij"), axis=-1)
    tx = tmap.apply(x)
    ks = np.arange(-N, N + 1)
    u = np.zeros((P, P), dtype=complex)
    c = np.asarray(coeffs, dtype=complex).reshape(D, D)
    for i1, m1 in enumerate(ks):
        for i2, m2 in enumerate(ks):
            if c[i1, i2] != 0:
                u += c[i1, i2] * np.exp(2j * np.pi * (m1 * tx[..., 0] + m2 * tx[..., 1]))
    uh = np.fft.fft2(u) / (P * P)
    K1, K2 = np.meshgrid(ks, ks, indexing="ij")
    out = uh[np.mod(K1, P), np.mod(K2, P)]
    out *= np.exp(-4.0 * np.pi ** 2 * nu * (K1 ** 2 + K2 ** 2))
    return out.ravel()


def build_advection_diffusion_generator(velocity_terms, nu, N):
    """Matrix of P_nu = v.grad - nu Lap on modes |k|_inf <= N.

    velocity_terms is a trig field (list of (h, w, kind)); every term must be
    divergence-free on coefficients (h . w = 0).  The advection block is
    skew-adjoint and the diffusion block the nonnegative diagonal
    4 pi^2 nu |k|^2, so the numerical range lies in Re >= 0.
    """
    if N < 4:
        raise ValueError("need N >= 4")
    if nu < 0:
        raise ValueError("nu must be >= 0")
    for h, w, kind in velocity_terms:
        if abs(h[0] * w[0] + h[1] * w[1]) > 1e-14:
            raise ValueError("velocity term %r is not divergence-free" % ((h, w, kind),))
    D = 2 * N + 1
    ks = np.arange(-N, N + 1)
    M = np.zeros((D * D, D * D), dtype=complex)
    idx = lambda k1, k2: (k1 + N) * D + (k2 + N)
    for i1, m1 in enumerate(ks):
        for i2, m2 in enumerate(ks):
            col = i1 * D + i2
            M[col, col] += 4.0 * np.pi ** 2 * nu * (m1 ** 2 + m2 ** 2)
            for h, w, kind in velocity_terms:
                mdotw = m1 * w[0] + m2 * w[1]
                if mdotw == 0:
                    continue
                # sin: (e_h - e_{-h})/2i ; cos: (e_h + e_{-h})/2
                for sign in (+1, -1):
                    k1, k2 = m1 + sign * h[0], m2 + sign * h[1]
                    if abs(k1) > N or abs(k2) > N:
                        continue
                    if kind == "sin":
                        M[idx(k1, k2), col] += np.pi * mdotw * sign
                    else:
                        M[idx(k1, k2), col] += 1j * np.pi * mdotw
    return TruncatedOperator(N, M, "generator", nu)


class SpectrumResult:
    """Eigenvalues with deterministic ordering and the spectral gap.

    Ordering: by decay rate (transfer: -log|mu|; generator: Re lambda), ties
    by imaginary part.  gap is the smallest decay rate after removing the
    single invariant eigenvalue (1 for transfer, 0 for generator).
    """

    __slots__ = ("eigenvalues", "gap", "kind", "nu", "N")

    def __init__(self, eigenvalues, gap, kind, nu, N):
        self.eigenvalues = eigenvalues
        self.gap = float(gap)
        self.kind = kind
        self.nu = float(nu)
        self.N = int(N)

    def decay_rates(self):
        if self.kind == "transfer":
            with np.errstate(divide="ignore"):
                return -np.log(np.abs(self.eigenvalues))
        return self.eigenvalues.real


def _check_conjugation_closed(matrix):
    """Deviation of the matrix from representing a real-space operator.

    A real operator in the plane-wave basis satisfies
    M[-k, -m] = conj(M[k, m]); with the symmetric mode ordering, negating
    both indices is reversal of both axes.  Checking this structurally is
    exact, unlike matching eigenvalue sets, which inherits the (possibly
    large) eigenvalue condition numbers of a non-normal truncation.
    """
    return float(np.abs(matrix[::-1, ::-1] - np.conj(matrix)).max())


def spectrum_and_gap(op, check_conjugation=True):
    """Dense spectrum and gap of a truncated operator."""
    ev = np.linalg.eigvals(op.matrix)
    if op.kind == "transfer":
        moduli = np.abs(ev)
        if np.any(moduli > 1.0 + 1e-10):
            raise ValueError("transfer spectrum escapes the unit disk: max |mu| = %g"
                             % moduli.max())
        near_one = np.abs(ev - 1.0) <= 1e-8
        if near_one.sum() != 1:
            raise ValueError("invariant eigenvalue 1 is not simple "
                             "(%d matches within 1e-8)" % near_one.sum())
        rest = ev[~near_one]
        with np.errstate(divide="ignore"):
            gap = float(np.min(-np.log(np.abs(rest))))
        rates = np.where(np.abs(ev) > 0, -np.log(np.where(np.abs(ev) > 0, np.abs(ev), 1.0)), np.inf)
    else:
        if np.any(ev.real < -1e-10):
            raise ValueError("generator spectrum leaks into Re < 0: min = %g"
                             % ev.real.min())
        near_zero = np.abs(ev) <= 1e-10
        rest = ev[~near_zero] if near_zero.any() else ev
        gap = float(np.min(rest.real))
        rates = ev.real
    if check_conjugation:
        err = _check_conjugation_closed(op.matrix)
        scale = max(1.0, float(np.abs(op.matrix).max()))
        if err > 1e-12 * scale:
            raise ValueError("operator is not conjugation-closed "
                             "(real-space reality broken): %g" % err)
    order = np.lexsort((ev.imag, rates))
    return SpectrumResult(ev[order], gap, op.kind, op.nu, op.N)


def top_eigenvalues_iterative(M, k=24):
    """Largest-modulus eigenvalues by implicitly restarted Arnoldi.

    The dense solve above dimension ~3000 is out of desk-scale reach, so
    truncation-stability checks at 2N use this path.
    """
    from scipy.sparse.linalg import eigs
    rng = np.random.Generator(np.random.Philox(key=np.array([11, M.shape[0]],
                                                            dtype=np.uint64)))
    v0 = rng.standard_normal(M.shape[0])
    return eigs(M, k=k, which="LM", v0=v0, return_eigenvectors=False,
                maxiter=5000, tol=1e-12)


def _region_eigs(tmap, nu, N, r0, dense_limit=3000):
    D = (2 * N + 1) ** 2
    op = build_transfer_operator(tmap, nu, N)
    if D <= dense_limit:
        ev = np.linalg.eigvals(op.matrix)
    else:
        ev = top_eigenvalues_iterative(op.matrix, k=48)
    return ev[np.abs(ev) >= r0]


def _match_sets(a, b):
    """Minimal-cost bipartite matching on complex distance.

    Returns (max matched displacement, number matched).  Unequal sizes leave
    the excess unmatched (a boundary-crossing event, reported by the caller).
    """
    from scipy.optimize import linear_sum_assignment
    if a.size == 0 or b.size == 0:
        return 0.0, 0
    cost = np.abs(a[:, None] - b[None, :])
    # deterministic tie-breaking by imaginary part
    cost = cost + 1e-15 * np.abs(a.imag[:, None] - b.imag[None, :])
    ri, ci = linear_sum_assignment(cost)
    return float(np.abs(a[ri] - b[ci]).max()), int(ri.size)


def resonance_convergence(tmap, nu_list, region_r0, N, check_truncation=True):
    """Track eigenvalues in {|mu| >= r0} along a decreasing nu sweep.

    Consecutive spectra are matched by minimal-cost bipartite matching on
    complex distance; the report carries the max matched displacement per
    step, any boundary-crossing events (count changes inside the region),
    and an N vs 2N truncation displacement at the final nu.
    """
    nu_list = list(nu_list)
    if any(b >= a for a, b in zip(nu_list, nu_list[1:])):
        raise ValueError("nu_list must be strictly decreasing")
    if not (region_r0 > 0):
        raise ValueError("region radius must be positive")
    sets = [_region_eigs(tmap, nu, N, region_r0) for nu in nu_list]
    displacements, events = [], []
    for i in range(len(sets) - 1):
        disp, nmatch = _match_sets(sets[i], sets[i + 1])
        displacements.append(disp)
        if sets[i].size != sets[i + 1].size:
            events.append((nu_list[i], nu_list[i + 1],
                           sets[i].size, sets[i + 1].size))
    report = {
        "nu_list": nu_list,
        "region_r0": float(region_r0),
        "counts": [int(s.size) for s in sets],
        "max_displacement_per_step": displacements,
        "boundary_events": events,
    }
    if check_truncation:
        fine = _region_eigs(tmap, nu_list[-1], 2 * N, region_r0)
        disp2, _ = _match_sets(sets[-1], fine)
        report["truncation_displacement"] = disp2
        report["truncation_stable"] = bool(disp2 <= 1e-6)
    return report


def gap_sweep(tmap, nu_list, N, convergence_check=True):
    """Transfer-operator gap across nu, each with a 2N convergence flag."""
    rows = []
    for nu in nu_list:
        res = spectrum_and_gap(build_transfer_operator(tmap, nu, N))
        converged = True
        if convergence_check:
            ev2 = top_eigenvalues_iterative(
                build_transfer_operator(tmap, nu, 2 * N).matrix, k=8)
            rest = ev2[np.abs(ev2 - 1.0) > 1e-8]
            gap2 = -np.log(np.max(np.abs(rest)))
            converged = bool(abs(gap2 - res.gap) <= 0.01 * abs(res.gap))
        rows.append({"nu": nu, "gap": res.gap, "N": N, "converged": converged})
    return rows


def shear_sector_gaps(nu, N, k1_max=6):
    """Slowest decay per advected sector of the shear v = (sin 2 pi x2, 0).

    The generator block-diagonalizes over k1 exactly (the shear couples only
    k2 -> k2 +- 1); the k1 = 0 sectors are pure diffusion (never enhanced)
    and are excluded.  Returns (total gap, enhancement over the bare
    diffusive floor 4 pi^2 nu of the slowest advected mode).
    """
    ks = np.arange(-N, N + 1)
    best = np.inf
    for k1 in range(1, k1_max + 1):
        D = 2 * N + 1
        block = np.zeros((D, D), dtype=complex)
        block[np.arange(D), np.arange(D)] = 4.0 * np.pi ** 2 * nu * (k1 ** 2 + ks ** 2)
        for i in range(D - 1):
            block[i + 1, i] += np.pi * k1
            block[i, i + 1] -= np.pi * k1
        best = min(best, float(np.linalg.eigvals(block).real.min()))
    return best, best - 4.0 * np.pi ** 2 * nu
