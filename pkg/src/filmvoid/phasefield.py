"""Diffuse-interface film energy and its constrained alternating
minimization.

The functional couples an elastic term degraded by the phase field,
(v^2 + eta) f(e(u)), with a scaled double-well and gradient penalty
c_W (W(v)/eps + eps/2 |grad v|^2).  Admissible phase fields live in
[0,1], equal 1 on the substrate band and 0 on the top band, and are
non-increasing along every column, which encodes the subgraph
constraint.

The u-subproblem (quadratic density) is a conjugate-gradient solve of
the fully integrated Q1 stiffness; the v-subproblem is projected
gradient descent with Armijo backtracking, the projection being the
exact Euclidean projection onto the monotone box (bands, then
pool-adjacent-violators per column, then clamping).  Both half-steps
descend one common discrete objective, so the energy trace cannot
increase.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .elasticity import ElasticDensity
from .geometry import Profile, subgraph_cell_fractions
from .grid import Grid, cell_average, cell_gradient, cell_strain
from .recovery import phasefield_recovery, volume_rescale
from .sharp import FilmConfig, energy_G_relaxed
from .wells import DOUBLE_WELL, Well, compute_cw

_MTOL = 1e-12


class SolverError(RuntimeError):
    pass


@dataclass
class PhaseParams:
    eps: float
    p: float = 2.0
    eta: float | None = None  # default eps**p, so eta * eps^(1-p) -> 0
    well: Well = DOUBLE_WELL
    cw: float = 0.0
    tol_energy: float = 1e-6
    tol_cg: float = 1e-10
    max_outer: int = 40
    max_inner: int = 120
    armijo: float = 1e-4
    volume_m: float | None = None
    tilt_delta: float = 0.0  # optional strict-monotonicity tilt, off by default

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("need eps > 0")
        if self.p <= 1:
            raise ValueError("need p > 1")
        if self.eta is None:
            self.eta = self.eps**self.p
        if self.eta <= 0:
            raise ValueError("need eta > 0")
        if self.cw == 0.0:
            self.cw = compute_cw(self.well)


# ----------------------------------------------------------------------
# admissibility
# ----------------------------------------------------------------------


def phase_violations(v: np.ndarray, grid: Grid) -> list[str]:
    out = []
    if np.min(v) < -_MTOL or np.max(v) > 1.0 + _MTOL:
        out.append("values leave [0,1]")
    if np.any(np.abs(v[grid.substrate_rows()] - 1.0) > _MTOL):
        out.append("substrate band is not 1")
    if np.any(np.abs(v[grid.top_rows()]) > _MTOL):
        out.append("top band is not 0")
    if np.any(np.diff(v, axis=0) > _MTOL):
        out.append("some column increases upward")
    return out


def pav_nonincreasing(y: np.ndarray) -> np.ndarray:
    """Euclidean projection of a sequence onto the non-increasing cone."""
    vals: list[float] = []
    wts: list[int] = []
    for x in y:
        vals.append(float(x))
        wts.append(1)
        while len(vals) > 1 and vals[-2] < vals[-1]:
            v2, w2 = vals.pop(), wts.pop()
            v1, w1 = vals.pop(), wts.pop()
            vals.append((v1 * w1 + v2 * w2) / (w1 + w2))
            wts.append(w1 + w2)
    out = np.empty(len(y))
    k = 0
    for v, w in zip(vals, wts):
        out[k : k + w] = v
        k += w
    return out


def project_admissible(v: np.ndarray, grid: Grid) -> np.ndarray:
    """Exact projection onto {bands} x {columnwise non-increasing} x [0,1]."""
    v = v.copy()
    sub = grid.substrate_rows()
    top = grid.top_rows()
    j0, j1 = sub[-1], top[0]
    for i in range(v.shape[1]):
        v[j0 + 1 : j1, i] = pav_nonincreasing(v[j0 + 1 : j1, i])
    np.clip(v, 0.0, 1.0, out=v)
    v[sub] = 1.0
    v[top] = 0.0
    return v


# ----------------------------------------------------------------------
# energy evaluation (cell-midpoint quadrature)
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseEnergy:
    elastic: float
    well_term: float
    grad_term: float
    admissible: bool = True
    note: str = ""

    @property
    def total(self) -> float:
        if not self.admissible:
            return np.inf
        return self.elastic + self.well_term + self.grad_term


def energy_Geps(
    u: np.ndarray,
    v: np.ndarray,
    grid: Grid,
    params: PhaseParams,
    density: ElasticDensity,
    u0: np.ndarray | None = None,
) -> PhaseEnergy:
    """Midpoint quadrature of the three diffuse-energy terms.

    Inadmissible inputs are priced at +infinity with a diagnostic, mirroring
    the extended-value convention of the functional.
    """
    grid.check_field(v)
    grid.check_field(u, 2)
    bad = phase_violations(v, grid)
    if u0 is not None:
        rows = grid.substrate_rows()
        if not np.allclose(u[rows], u0[rows], atol=1e-9):
            bad.append("displacement detaches from the substrate datum")
    if bad:
        return PhaseEnergy(np.inf, np.inf, np.inf, admissible=False, note="; ".join(bad))
    vc = cell_average(v)
    f = density.energy_voigt(cell_strain(u, grid))
    gx, gy = cell_gradient(v, grid)
    da = grid.cell_area
    elastic = float(np.sum((vc**2 + params.eta) * f) * da)
    well_term = float(params.cw / params.eps * np.sum(params.well.f(vc)) * da)
    grad_term = float(params.cw * params.eps / 2.0 * np.sum(gx**2 + gy**2) * da)
    return PhaseEnergy(elastic, well_term, grad_term)


# ----------------------------------------------------------------------
# Q1 element data (2x2 Gauss) for the elastic half-step
# ----------------------------------------------------------------------

_GPTS = np.array([(-1, -1), (1, -1), (1, 1), (-1, 1)]) / np.sqrt(3.0)


def _shape_data(grid: Grid):
    """Shape values N (4 gauss x 4 nodes) and strain matrices B (4 x 3 x 8)."""
    N = np.empty((4, 4))
    B = np.zeros((4, 3, 8))
    for g, (xi, et) in enumerate(_GPTS):
        n = 0.25 * np.array(
            [(1 - xi) * (1 - et), (1 + xi) * (1 - et), (1 + xi) * (1 + et), (1 - xi) * (1 + et)]
        )
        dx = 0.25 * np.array([-(1 - et), (1 - et), (1 + et), -(1 + et)]) * 2.0 / grid.hx
        dy = 0.25 * np.array([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)]) * 2.0 / grid.hy
        N[g] = n
        for a in range(4):
            B[g, 0, 2 * a] = dx[a]
            B[g, 1, 2 * a + 1] = dy[a]
            B[g, 2, 2 * a] = dy[a]
            B[g, 2, 2 * a + 1] = dx[a]
    return N, B


def _cell_node_indices(grid: Grid) -> np.ndarray:
    """Node indices of each cell in local order (ll, lr, ur, ul), (ncell, 4)."""
    jj, ii = np.meshgrid(np.arange(grid.ny), np.arange(grid.nx), indexing="ij")
    n0 = jj * (grid.nx + 1) + ii
    return np.stack([n0, n0 + 1, n0 + grid.nx + 2, n0 + grid.nx + 1], axis=-1).reshape(-1, 4)


def _corner_values(v: np.ndarray) -> np.ndarray:
    """(ncell, 4) corner values in local order."""
    return np.stack(
        [v[:-1, :-1], v[:-1, 1:], v[1:, 1:], v[1:, :-1]], axis=-1
    ).reshape(-1, 4)


def _gauss_strains(u: np.ndarray, grid: Grid, B: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    ue = u.reshape(-1, 2)[nodes]  # (ncell, 4, 2)
    ue = ue.reshape(-1, 8)
    return np.einsum("gab,eb->ega", B, ue)  # (ncell, 4, 3) with voigt (exx, eyy, gamma)


def elastic_gauss(
    u: np.ndarray, v: np.ndarray, grid: Grid, params: PhaseParams, density: ElasticDensity
) -> float:
    """Fully integrated degraded elastic energy (solver objective part)."""
    N, B = _shape_data(grid)
    nodes = _cell_node_indices(grid)
    strains = _gauss_strains(u, grid, B, nodes)
    vg = _corner_values(v) @ N.T  # (ncell, 4)
    voigt = strains.copy()
    voigt[..., 2] *= 0.5  # gamma -> e_xy
    f = density.energy_voigt(voigt)
    detj = grid.cell_area / 4.0
    return float(np.sum((vg**2 + params.eta) * f) * detj)


def phase_midpoint(v: np.ndarray, grid: Grid, params: PhaseParams) -> float:
    vc = cell_average(v)
    gx, gy = cell_gradient(v, grid)
    da = grid.cell_area
    return float(
        params.cw / params.eps * np.sum(params.well.f(vc)) * da
        + params.cw * params.eps / 2.0 * np.sum(gx**2 + gy**2) * da
    )


def solver_objective(u, v, grid, params, density) -> float:
    return elastic_gauss(u, v, grid, params, density) + phase_midpoint(v, grid, params)


# ----------------------------------------------------------------------
# u-subproblem: CG on the SPD degraded stiffness
# ----------------------------------------------------------------------


def _dirichlet_nodes(grid: Grid, where: str) -> np.ndarray:
    ny1, nx1 = grid.node_shape()
    mask = np.zeros((ny1, nx1), dtype=bool)
    if where == "substrate":
        mask[grid.substrate_rows()] = True
    elif where == "boundary":
        mask[0] = mask[-1] = True
        mask[:, 0] = mask[:, -1] = True
    else:
        raise ValueError("dirichlet must be 'substrate' or 'boundary'")
    return mask.reshape(-1)


def solve_u(
    v: np.ndarray,
    grid: Grid,
    params: PhaseParams,
    density: ElasticDensity,
    u0: np.ndarray,
    dirichlet: str = "substrate",
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, dict]:
    """Minimize the degraded elastic energy at fixed v.

    Dirichlet values are taken from u0 on the selected node set; the free
    block is solved by Jacobi-preconditioned conjugate gradients, warm
    started at x0, so the returned energy never exceeds the input's.
    """
    if density.kind != "hooke":
        raise SolverError("the elastic half-step needs the quadratic (p=2) density")
    N, B = _shape_data(grid)
    nodes = _cell_node_indices(grid)
    D = density.hooke_voigt_matrix()
    detj = grid.cell_area / 4.0
    Mg = np.einsum("gia,ij,gjb->gab", B, D, B) * detj  # (4, 8, 8)
    vg = _corner_values(v) @ N.T
    coef = vg**2 + params.eta
    Ke = np.einsum("eg,gab->eab", coef, Mg)

    ncell = nodes.shape[0]
    edof = np.empty((ncell, 8), dtype=np.int64)
    edof[:, 0::2] = 2 * nodes
    edof[:, 1::2] = 2 * nodes + 1
    rows = np.repeat(edof, 8, axis=1).ravel()
    cols = np.tile(edof, (1, 8)).ravel()
    ndof = 2 * (grid.nx + 1) * (grid.ny + 1)
    K = sp.csr_matrix((Ke.ravel(), (rows, cols)), shape=(ndof, ndof))

    fixed = np.repeat(_dirichlet_nodes(grid, dirichlet), 2)
    free = ~fixed
    ud = u0.reshape(-1)[fixed]
    b = -K[free][:, fixed] @ ud
    Kff = K[free][:, free]
    x_start = (x0 if x0 is not None else u0).reshape(-1)[free]
    diag = Kff.diagonal()
    M = sp.diags(1.0 / np.where(diag > 0, diag, 1.0))
    x, info = spla.cg(
        Kff, b, x0=x_start, rtol=params.tol_cg, atol=0.0, maxiter=20000, M=M
    )
    res = float(np.linalg.norm(Kff @ x - b) / max(np.linalg.norm(b), 1e-300))
    u = np.empty(ndof)
    u[fixed] = ud
    u[free] = x
    return u.reshape(grid.ny + 1, grid.nx + 1, 2), {"cg_info": int(info), "residual": res}


# ----------------------------------------------------------------------
# v-subproblem: projected gradient with Armijo backtracking
# ----------------------------------------------------------------------


def _phase_gradient(
    v: np.ndarray, grid: Grid, params: PhaseParams, fgauss: np.ndarray, N: np.ndarray
) -> np.ndarray:
    ny, nx = grid.ny, grid.nx
    da = grid.cell_area
    # coupling through the degraded elastic term (Gauss points)
    vg = _corner_values(v) @ N.T
    gc = (2.0 * (da / 4.0) * vg * fgauss) @ N  # (ncell, 4 corners)
    gc = gc.reshape(ny, nx, 4)
    out = np.zeros_like(v)
    out[:-1, :-1] += gc[..., 0]
    out[:-1, 1:] += gc[..., 1]
    out[1:, 1:] += gc[..., 2]
    out[1:, :-1] += gc[..., 3]
    # well term at cell midpoints
    vc = cell_average(v)
    wc = (params.cw / params.eps) * params.well.df(vc) * da * 0.25
    out[:-1, :-1] += wc
    out[:-1, 1:] += wc
    out[1:, :-1] += wc
    out[1:, 1:] += wc
    # gradient penalty
    gx, gy = cell_gradient(v, grid)
    ax = params.cw * params.eps * da * gx / (2.0 * grid.hx)
    ay = params.cw * params.eps * da * gy / (2.0 * grid.hy)
    out[:-1, :-1] += -ax - ay
    out[:-1, 1:] += ax - ay
    out[1:, 1:] += ax + ay
    out[1:, :-1] += -ax + ay
    return out


def solve_v(
    u: np.ndarray,
    v: np.ndarray,
    grid: Grid,
    params: PhaseParams,
    density: ElasticDensity,
) -> tuple[np.ndarray, dict]:
    """Descend the phase energy at fixed u over the admissible monotone set.

    Projected gradient with backtracking accepts only energy-decreasing
    steps; on line-search failure the best iterate is returned.
    """
    N, B = _shape_data(grid)
    nodes = _cell_node_indices(grid)
    strains = _gauss_strains(u, grid, B, nodes)
    voigt = strains.copy()
    voigt[..., 2] *= 0.5
    fgauss = density.energy_voigt(voigt)  # (ncell, 4), fixed during the half-step

    def objective(w):
        vg = _corner_values(w) @ N.T
        elastic = float(np.sum((vg**2 + params.eta) * fgauss) * grid.cell_area / 4.0)
        return elastic + phase_midpoint(w, grid, params)

    v = project_admissible(v, grid)
    phi = objective(v)
    t = params.eps  # natural step scale; adapted by the search
    note = ""
    for _ in range(params.max_inner):
        g = _phase_gradient(v, grid, params, fgauss, N)
        accepted = False
        for _ in range(40):
            vn = project_admissible(v - t * g, grid)
            d = vn - v
            dec = float(np.vdot(g, d))
            phin = objective(vn)
            if phin <= phi + params.armijo * dec:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            note = "line search stalled; returning best iterate"
            break
        moved = float(np.max(np.abs(vn - v)))
        drop = phi - phin
        v, phi = vn, phin
        t *= 1.8
        if drop <= 1e-12 * (1.0 + abs(phi)) and moved <= 1e-10:
            break
    return v, {"objective": phi, "note": note}


# ----------------------------------------------------------------------
# alternating minimization
# ----------------------------------------------------------------------


@dataclass
class PhaseState:
    u: np.ndarray
    v: np.ndarray
    trace: list[tuple[str, float]] = field(default_factory=list)
    converged: bool = False
    info: dict = field(default_factory=dict)

    def energies(self) -> list[float]:
        return [e for _, e in self.trace]

    def half_step_energies(self) -> list[float]:
        """Trace restricted to descent half-steps (volume events re-baseline)."""
        out = []
        for label, e in self.trace:
            if label == "vol":
                out = [e]
            else:
                out.append(e)
        return out


def alternate_minimize(
    grid: Grid,
    params: PhaseParams,
    density: ElasticDensity,
    u0: np.ndarray,
    v_init: np.ndarray,
    u_init: np.ndarray | None = None,
) -> PhaseState:
    """Alternate the two half-steps until the energy settles.

    Each outer iteration solves the elastic subproblem, descends the phase
    subproblem, and (when a volume target is set) re-projects the profile
    to the prescribed volume; the trace records the common objective after
    every event.
    """
    v = project_admissible(v_init, grid)
    u = u_init.copy() if u_init is not None else u0.copy()
    state = PhaseState(u, v)
    e = solver_objective(u, v, grid, params, density)
    state.trace.append(("init", e))
    prev_cycle = e
    for _ in range(params.max_outer):
        u, uinfo = solve_u(v, grid, params, density, u0, x0=u)
        e = solver_objective(u, v, grid, params, density)
        state.trace.append(("u", e))
        v, vinfo = solve_v(u, v, grid, params, density)
        e = solver_objective(u, v, grid, params, density)
        state.trace.append(("v", e))
        if params.volume_m is not None:
            v = volume_projection(v, grid, params.volume_m, params)
            e = solver_objective(u, v, grid, params, density)
            state.trace.append(("vol", e))
        if abs(prev_cycle - e) <= params.tol_energy * max(1.0, abs(e)):
            state.converged = True
            break
        prev_cycle = e
    state.u, state.v = u, v
    state.info = {"outer": sum(1 for l, _ in state.trace if l == "u"), **uinfo, **vinfo}
    return state


# ----------------------------------------------------------------------
# profile extraction and volume projection
# ----------------------------------------------------------------------


def extract_profile(v: np.ndarray, grid: Grid, s: float, tilt_delta: float = 0.0) -> Profile:
    """Height of the superlevel set {v > s} per column.

    Columns must be non-increasing (apply the tilt for strictness when a
    raw field is noisy); the crossing is located by linear interpolation
    and clamped to [0, M].
    """
    if not (0.0 < s < 1.0):
        raise ValueError("need 0 < s < 1")
    grid.check_field(v)
    ys = grid.ys()
    w = v
    if tilt_delta > 0.0:
        w = np.clip(v - tilt_delta * ys[:, None], 0.0, 1.0)
    if np.any(np.diff(w, axis=0) > 1e-9):
        raise ValueError("non-monotone column; pre-process with the tilt")
    M = grid.M
    hs = np.empty(grid.nx + 1)
    for i in range(grid.nx + 1):
        col = w[:, i]
        below = np.nonzero(col <= s)[0]
        if below.size == 0:
            hs[i] = M
            continue
        j = int(below[0])
        if j == 0:
            hs[i] = 0.0
            continue
        frac = (col[j - 1] - s) / max(col[j - 1] - col[j], 1e-300)
        hs[i] = ys[j - 1] + frac * grid.hy
    return Profile.smooth(grid.xs(), np.clip(hs, 0.0, M), cap=M)


def volume_projection(v: np.ndarray, grid: Grid, m: float, params: PhaseParams) -> np.ndarray:
    """Rescale the extracted profile to the target volume and rebuild the
    phase field as its recovery transition."""
    h = extract_profile(v, grid, 0.5, tilt_delta=params.tilt_delta)
    hstar = volume_rescale(h, m, grid.M)
    return phasefield_recovery(hstar, grid, params.eps, well=params.well)


# ----------------------------------------------------------------------
# epsilon sweep
# ----------------------------------------------------------------------


@dataclass
class SweepScenario:
    grid: Grid
    density: ElasticDensity
    u0: np.ndarray
    volume_m: float | None = None
    init: str = "flat"  # "flat" | "perturbed"
    seed: int = 0
    params: dict = field(default_factory=dict)


@dataclass
class SweepRow:
    eps: float
    total: float
    elastic: float
    surface_proxy: float
    l1_to_sharp: float
    relaxed_of_extracted: float
    profile: Profile
    state: PhaseState

    def csv(self) -> str:
        return (
            f"{self.eps!r},{self.total!r},{self.elastic!r},"
            f"{self.surface_proxy!r},{self.l1_to_sharp!r}"
        )


def _sweep_init(grid: Grid, params: PhaseParams, scenario: SweepScenario) -> np.ndarray:
    m = scenario.volume_m if scenario.volume_m is not None else 0.5 * grid.M * grid.L
    flat = Profile.flat(grid.L, m / grid.L, cap=grid.M)
    v = phasefield_recovery(flat, grid, params.eps, well=params.well)
    if scenario.init == "perturbed":
        rng = np.random.Generator(np.random.Philox(scenario.seed))
        v = v + 0.1 * rng.standard_normal(v.shape)
    return v


def run_scenario(eps: float, scenario: SweepScenario) -> SweepRow:
    grid = scenario.grid
    params = PhaseParams(eps=eps, volume_m=scenario.volume_m, **scenario.params)
    v0 = _sweep_init(grid, params, scenario)
    state = alternate_minimize(grid, params, scenario.density, scenario.u0, v0)
    e = energy_Geps(state.u, state.v, grid, params, scenario.density, u0=scenario.u0)
    h = extract_profile(state.v, grid, 0.5, tilt_delta=params.tilt_delta)
    fr = subgraph_cell_fractions(h, grid)
    l1 = float(np.sum(np.abs(cell_average(state.v) - fr)) * grid.cell_area)
    u_sharp = _zero_above(state.u, grid, h)
    ghat = energy_G_relaxed(
        FilmConfig(grid, h, u_sharp, (), scenario.u0), scenario.density
    ).total
    return SweepRow(
        eps=eps,
        total=e.total,
        elastic=e.elastic,
        surface_proxy=e.well_term + e.grad_term,
        l1_to_sharp=l1,
        relaxed_of_extracted=float(ghat),
        profile=h,
        state=state,
    )


def _zero_above(u: np.ndarray, grid: Grid, h: Profile) -> np.ndarray:
    xs, ys = np.meshgrid(grid.xs(), grid.ys())
    out = u.copy()
    out[ys > h.value(grid.xs())[None, :] + 1e-12] = 0.0
    return out


def gamma_sweep(eps_list, scenario: SweepScenario, threads: int = 1) -> list[SweepRow]:
    """Minimize at each epsilon of a decreasing list; failures are recorded
    as rows with infinite total so the sweep continues."""
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be decreasing")

    def safe(eps):
        try:
            return run_scenario(eps, scenario)
        except Exception as exc:  # per-eps failures must not kill the sweep
            return SweepRow(
                eps, np.inf, np.inf, np.inf, np.inf, np.inf, Profile.flat(scenario.grid.L, 0.0),
                PhaseState(scenario.u0, scenario.u0[..., 0] * 0.0, info={"error": str(exc)}),
            )

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(safe, eps_list))
    return [safe(e) for e in eps_list]


# ----------------------------------------------------------------------
# 1-D reduced profile energy (validation utility)
# ----------------------------------------------------------------------


def optimal_profile_energy_1d(
    eps: float, n: int, well: Well = DOUBLE_WELL, length: float = 1.0, iters: int = 400
) -> float:
    """Minimum of c_W int (W(v)/eps + eps/2 v'^2) over monotone v on a
    1-D grid with v(0) = 1, v(L) = 0, same midpoint quadrature as 2-D."""
    from .wells import transition_profile

    cw = compute_cw(well)
    h = length / n
    ys = np.linspace(0.0, length, n + 1)
    q = transition_profile(well)
    v = q((ys - 0.5 * length) / eps)
    v[0], v[-1] = 1.0, 0.0

    def proj(w):
        w = w.copy()
        w[0], w[-1] = 1.0, 0.0
        w[1:-1] = pav_nonincreasing(np.clip(w[1:-1], 0.0, 1.0))
        return np.clip(w, 0.0, 1.0)

    def energy(w):
        mid = 0.5 * (w[:-1] + w[1:])
        dv = np.diff(w) / h
        return float(cw * np.sum(well.f(mid) / eps + 0.5 * eps * dv**2) * h)

    def grad(w):
        mid = 0.5 * (w[:-1] + w[1:])
        dv = np.diff(w) / h
        g = np.zeros_like(w)
        wc = cw * h / eps * 0.5 * well.df(mid)
        g[:-1] += wc
        g[1:] += wc
        gg = cw * eps * dv
        g[:-1] -= gg
        g[1:] += gg
        return g

    v = proj(v)
    phi = energy(v)
    t = eps
    for _ in range(iters):
        g = grad(v)
        for _ in range(40):
            vn = proj(v - t * g)
            if energy(vn) <= phi + 1e-4 * float(np.vdot(g, vn - v)):
                break
            t *= 0.5
        phin = energy(vn)
        if phin > phi - 1e-14 * (1 + abs(phi)):
            v, phi = vn, min(phi, phin)
            break
        v, phi = vn, phin
        t *= 1.7
    return phi
