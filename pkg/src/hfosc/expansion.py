"""Coefficient recursion for the high-frequency periodic solution.

The periodic solution is expanded as

    x(t) = omega * v_{-1}
           + sum_{k>=0} omega^{-k} (x_k + v_k + y_k(omega t)),

where every v_k lies in ker(A0) (v_k = sum_j C_k^j a_j), every x_k is
orthogonal to ker(A0), and every y_k is a zero-mean trigonometric
polynomial with harmonics up to (k+1) m.  Matching powers of omega in the
equation gives, at order omega^{-p},

    mean part:        A0 x_p + A1 v_{p-1} + theta_p = 0,
    oscillating part: y_{p+1}' = (A0 + B_osc) y_p + B0 (y_{p-1} + ...)
                                 + B_osc (x_p + v_p) + ...,

with theta_p = B0 x_{p-1} + sum_{1<=|l|<=m} B_{-l} beta_l^p and beta^p the
part of y_p not proportional to v_{p-1}.  The mean equation is solvable
exactly when its projection on ker(A0^H) vanishes; that fixes C_{p-1}
through the solvability matrix, after which x_p = -W (A1 v_{p-1} +
theta_p).  So each sweep p first assembles beta^p from level p-1 data,
then closes level p-1 by solving for C_{p-1}, then opens level p.

Bookkeeping note: beta^p collects, per harmonic l, seven kinds of
contributions from the integrated oscillating part (plus the forcing
harmonics, which enter only at p = 1).  Division by i*l is the zero-mean
antiderivative in the phase variable; crossed products of B harmonics
convolve indices and skip l1 + l2 = 0, whose mean went into theta instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ProblemSpec, TrigVectorPoly
from .spectral import KernelData, compute_kernel_data


@dataclass(frozen=True, eq=False)
class ExpansionLevel:
    """One order of the expansion.

    ``mean`` is x_k (orthogonal to the kernel), ``kernel_coeff`` holds the
    coefficients C_k along the kernel basis, ``osc`` is the full zero-mean
    oscillating part y_k and ``harmonics`` its non-leading payload beta^k
    (y_k minus the term generated directly by v_{k-1}).  ``forcing`` is the
    inhomogeneity theta_k whose kernel projections determined C_{k-1}, and
    ``solvability_defect`` is how well the projections of this level's own
    closing equation were annihilated.  ``harmonic_mass`` is the summed
    Euclidean norm of the beta coefficients (the growth-envelope quantity).
    """

    mean: np.ndarray
    kernel_coeff: np.ndarray
    osc: TrigVectorPoly
    harmonics: TrigVectorPoly
    forcing: np.ndarray
    harmonic_mass: float
    solvability_defect: float


@dataclass(frozen=True, eq=False)
class AsymptoticExpansion:
    """Orders 0..order of the expansion plus the O(omega) kernel term."""

    order: int
    m: int
    leading: np.ndarray  # C_{-1}
    leading_defect: float
    levels: list
    kernel_data: KernelData

    @property
    def n(self) -> int:
        return self.kernel_data.kernel.shape[0]


def expand(
    spec: ProblemSpec,
    order: int,
    kernel_data: KernelData | None = None,
) -> AsymptoticExpansion:
    """Run the recursion through order + 1 sweeps and return levels 0..order."""
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    kd = kernel_data if kernel_data is not None else compute_kernel_data(spec)
    n, m = spec.n, spec.m
    A0, B0, B = spec.A0, spec.B0, spec.B
    A1 = kd.averaged
    kernel, left = kd.kernel, kd.left_kernel
    W = kd.restricted_inverse

    def close_level(theta):
        """Solve the mean equation: C from solvability, then the x part."""
        coeff = np.linalg.solve(kd.solvability, -(left.conj().T @ theta))
        v = kernel @ coeff
        g = A1 @ v + theta
        defect = float(np.max(np.abs(left.conj().T @ g)))
        return coeff, v, -(W @ g), defect

    theta0 = spec.d0.astype(complex)
    c_lead, v_prev, x0, lead_defect = close_level(theta0)

    xs = {0: x0}
    vs = {-1: v_prev}
    betas = {0: {}}
    thetas = {0: theta0}
    mus = {0: 0.0}
    ys = {0: {l: (Bl @ v_prev) / (1j * l) for l, Bl in B.items()}}
    coeffs = {-1: c_lead}
    defects = {-1: lead_defect}

    zero = np.zeros(n, dtype=complex)
    for p in range(1, order + 2):
        beta = {}

        def add(l, vec):
            beta[l] = beta.get(l, zero) + vec

        x_prev = xs[p - 1]
        v2 = vs.get(p - 2, zero)  # v_{p-2}; v_{-1} exists, earlier ones vanish
        v3 = vs.get(p - 3, zero)
        for l, Bl in B.items():
            add(l, (Bl @ x_prev) / (1j * l))
            add(l, -(A0 @ (Bl @ v2)) / l**2)
            add(l, -(B0 @ (Bl @ v3)) / l**2)
        for l, b in betas[p - 1].items():
            add(l, (A0 @ b) / (1j * l))
        for l, b in betas.get(p - 2, {}).items():
            add(l, (B0 @ b) / (1j * l))
        for l1, B1 in B.items():
            Bv = B1 @ v2
            for l2, B2 in B.items():
                l = l1 + l2
                if l != 0:
                    add(l, -(B2 @ Bv) / (l * l1))
        for l1, b in betas[p - 1].items():
            for l2, B2 in B.items():
                l = l1 + l2
                if l != 0:
                    add(l, (B2 @ b) / (1j * l))
        if p == 1:
            for l, dl in spec.d.items():
                if l != 0:
                    add(l, dl / (1j * l))

        theta = B0 @ x_prev
        for l, b in beta.items():
            Bminus = B.get(-l)
            if Bminus is not None:
                theta = theta + Bminus @ b

        coeff, v, x, defect = close_level(theta)
        coeffs[p - 1] = coeff
        defects[p - 1] = defect
        vs[p - 1] = v
        xs[p] = x
        betas[p] = beta
        thetas[p] = theta
        mus[p] = float(sum(np.linalg.norm(b) for b in beta.values()))
        y = {l: (Bl @ v) / (1j * l) for l, Bl in B.items()}
        for l, b in beta.items():
            y[l] = y.get(l, zero) + b
        ys[p] = y

    levels = [
        ExpansionLevel(
            mean=xs[k],
            kernel_coeff=coeffs[k],
            osc=TrigVectorPoly(n, ys[k]),
            harmonics=TrigVectorPoly(n, betas[k]),
            forcing=thetas[k],
            harmonic_mass=mus[k],
            solvability_defect=defects[k],
        )
        for k in range(order + 1)
    ]
    return AsymptoticExpansion(
        order=order,
        m=m,
        leading=c_lead,
        leading_defect=lead_defect,
        levels=levels,
        kernel_data=kd,
    )


def partial_sum(exp: AsymptoticExpansion, r: int, omega, t) -> np.ndarray:
    """Evaluate the order-r partial sum at time(s) t.

    The last axis of the result is the state dimension; leading axes follow
    the shape of t.
    """
    if not 0 <= r <= exp.order:
        raise ValueError(f"r must be in [0, {exp.order}], got {r}")
    kernel = exp.kernel_data.kernel
    t = np.asarray(t, dtype=float)
    out = np.broadcast_to(omega * (kernel @ exp.leading), t.shape + (exp.n,)).copy()
    tau = omega * t
    for k, lev in enumerate(exp.levels[: r + 1]):
        const = lev.mean + kernel @ lev.kernel_coeff
        out += float(omega) ** (-k) * (const + lev.osc(tau))
    return out


def ode_residual(
    spec: ProblemSpec,
    exp: AsymptoticExpansion,
    r: int,
    omega,
    samples: int = 256,
) -> float:
    """Worst defect of the order-r partial sum in the differential equation.

    The time derivative is taken analytically (only the oscillating parts
    move), so this measures the construction, not a difference scheme.
    Scales like omega^{-r} when every matched order truly cancels.
    """
    if not 0 <= r <= exp.order:
        raise ValueError(f"r must be in [0, {exp.order}], got {r}")
    taus = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    t = taus / omega
    S = partial_sum(exp, r, omega, t)
    dS = np.zeros_like(S)
    for k, lev in enumerate(exp.levels[: r + 1]):
        dS += float(omega) ** (1 - k) * lev.osc.derivative()(taus)
    worst = 0.0
    for i, tau in enumerate(taus):
        rhs = spec.system_matrix(tau, omega) @ S[i] + spec.forcing(tau)
        worst = max(worst, float(np.linalg.norm(dS[i] - rhs)))
    return worst
