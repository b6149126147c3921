"""Sweep harnesses: 1-D parameter sweeps, the 2-D boundary phase diagram,
disorder ensembles, critical-point extraction, and finite-size scans.

Every grid point / realization is a pure function of (spec, index, seed),
so sweeps are embarrassingly parallel; aggregation is index-ordered and the
output is identical for any worker count, including 1. To keep that
guarantee bitwise (BLAS thread count changes reduction order) and to avoid
thread-pool oversubscription under process parallelism, all task execution
runs with the BLAS pool pinned to one thread. Exceptional points and
defective spectra never abort a sweep: the row is flagged and carries the
error text.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from . import models
from .coherence import (
    Normalization,
    PureBiorthState,
    ReferenceBasis,
    make_reference_basis,
    mqi,
    state_from_eigensystem,
)
from .errors import (
    DefectiveSpectrumError,
    EnsembleFailureError,
    ExceptionalPointError,
    NoPeakError,
)
from .linalg import PAIRING_TOL_REL, EigenSystem, eig_general

_TINY = 1e-300

SPIN_MODELS = ("two_level", "ising")
HN_MODELS = ("hn_free", "hn_disordered")


class StateSelector(enum.Enum):
    GROUND = "ground"          # minimal Re(E); ties resolved to the Im >= 0 branch
    MID_SPECTRUM = "mid"       # index floor(dim/2) after the (Re, Im) sort


def _as_selector(selector) -> StateSelector:
    if isinstance(selector, StateSelector):
        return selector
    return StateSelector(selector)


def pick_state_index(es: EigenSystem, selector=StateSelector.GROUND) -> int:
    """Deterministic state choice on the canonically sorted spectrum."""
    selector = _as_selector(selector)
    if selector is StateSelector.MID_SPECTRUM:
        return es.dim // 2
    w = es.eigenvalues
    re = w.real
    ptol = PAIRING_TOL_REL * max(float(np.abs(w).max()), _TINY)
    cands = np.flatnonzero(re <= re.min() + ptol)
    for i in cands:  # Im ascending within the tie group
        if w[i].imag >= 0:
            return int(i)
    return int(cands[-1])


def select_state(
    es: EigenSystem,
    selector=StateSelector.GROUND,
    normalization: Normalization = Normalization.TRACE_ONE,
) -> PureBiorthState:
    """Pick an eigenstate as a rank-1 biorthogonal state.

    Refuses defective systems; TraceOne construction refuses exceptional
    points (|<l|r>| at the self-orthogonality threshold).
    """
    if es.is_defective:
        raise DefectiveSpectrumError(
            f"eigensystem is defective at indices {es.defect_indices}",
            indices=es.defect_indices,
        )
    idx = pick_state_index(es, selector)
    return state_from_eigensystem(es, idx, normalization)


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep description.

    model: "two_level" (PT gain/loss family, fixed {"j"}, sweep "gamma"),
           "ising" (fixed {"L","J","J2","Gamma","h_y"}, sweep e.g. "h_z"),
           "hn_free" / "hn_disordered" (fixed {"n","j_l","j_r","delta_l",
           "delta_r", ...}, sweep e.g. "ratio" = J_L/J_R).
    reference: "sx" | "sy" | "sz" | "h2" | ("custom", (nx, ny, nz));
           "h2" is supported for the Hatano-Nelson models only (real-valued
           gap labels; intensities are not tabulated per mode).
    """

    model: str
    fixed: dict
    sweep_param: str
    grid: tuple[float, ...]
    reference: object = "sz"
    selector: StateSelector = StateSelector.GROUND
    normalization: Normalization = Normalization.TRACE_ONE
    workers: int = 1

    def __post_init__(self):
        if self.model not in SPIN_MODELS + HN_MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        grid = tuple(float(g) for g in self.grid)
        if len(grid) < 2:
            raise ValueError("grid must have at least 2 points")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly ascending")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "selector", _as_selector(self.selector))
        if self.reference == "h2" and self.model not in HN_MODELS:
            raise ValueError("reference 'h2' is only supported for Hatano-Nelson models")


@dataclass(frozen=True)
class SweepRow:
    """One grid point. ``ep_flag`` true means the second moment is omitted
    (exceptional point / defective spectrum), never interpolated."""

    value: float
    second_moment: float | None
    labels: tuple[float, ...] | None
    intensities: tuple[float, ...] | None
    energy: complex | None
    ep_flag: bool
    error: str = ""

    def intensity(self, m: float, tol: float = 1e-9) -> float:
        if self.labels is None:
            raise KeyError("row has no per-mode intensities")
        hits = [i for i, lab in enumerate(self.labels) if abs(lab - m) <= tol]
        if len(hits) != 1:
            raise KeyError(f"no unique gap label at m = {m}")
        return self.intensities[hits[0]]


def _build_hamiltonian(model: str, params: dict) -> np.ndarray:
    if model == "two_level":
        p = models.TwoLevelParams.gain_loss(params["j"], params["gamma"])
        return models.build_two_level(p)
    if model == "ising":
        p = models.IsingParams(
            L=int(params["L"]), J=params["J"], J2=params["J2"],
            Gamma=params["Gamma"], h_y=params["h_y"], h_z=params["h_z"],
        )
        return models.build_ising(p)
    j_r = params["j_r"]
    j_l = params["ratio"] * j_r if "ratio" in params else params["j_l"]
    disorder = None
    if model == "hn_disordered":
        disorder = models.DisorderParams(
            W=params["w"], seed=int(params["seed"]),
            realization_index=int(params.get("realization_index", 0)),
        )
    p = models.HNParams(
        N=int(params["n"]), J_L=j_l, J_R=j_r,
        delta_L=params.get("delta_l", 0.0), delta_R=params.get("delta_r", 0.0),
        disorder=disorder,
    )
    return models.build_hatano_nelson(p)


_AXES = {"sx": (1.0, 0.0, 0.0), "sy": (0.0, 1.0, 0.0), "sz": (0.0, 0.0, 1.0)}

# Per-process cache so parallel workers build each reference basis once.
_BASIS_CACHE: dict[tuple, ReferenceBasis] = {}


def _cached_basis(key: tuple, builder) -> ReferenceBasis:
    if key not in _BASIS_CACHE:
        if len(_BASIS_CACHE) > 16:
            _BASIS_CACHE.clear()
        _BASIS_CACHE[key] = builder()
    return _BASIS_CACHE[key]


def _reference_basis(model: str, reference, params: dict, h: np.ndarray) -> ReferenceBasis:
    if reference == "h2":
        # V_j is real so the anti-Hermitian part never depends on disorder;
        # the key deliberately omits it.
        key = ("h2", params["n"], params.get("ratio"), params.get("j_l"),
               params["j_r"], params.get("delta_l", 0.0), params.get("delta_r", 0.0))
        return _cached_basis(key, lambda: make_reference_basis(models.hermitian_split(h)[1]))
    if isinstance(reference, tuple) and reference[0] == "custom":
        axis = tuple(float(x) for x in reference[1])
        return _cached_basis(
            ("axis", axis),
            lambda: make_reference_basis(models.build_spin_observable(axis)),
        )
    if reference in _AXES:
        if model == "two_level":
            axis = _AXES[reference]
            return _cached_basis(
                ("axis", axis),
                lambda: make_reference_basis(models.build_spin_observable(axis)),
            )
        if model == "ising" and reference == "sz":
            L = int(params["L"])
            return _cached_basis(
                ("collective_sz", L),
                lambda: make_reference_basis(models.build_collective_sz(L)),
            )
        raise ValueError(f"reference {reference!r} not supported for model {model!r}")
    raise ValueError(f"unknown reference {reference!r}")


def _sweep_point(task) -> SweepRow:
    (model, fixed_items, sweep_param, value, reference, selector_value, norm_value) = task
    params = dict(fixed_items)
    params[sweep_param] = value
    h = _build_hamiltonian(model, params)
    spin = model in SPIN_MODELS
    energy = None
    try:
        es = eig_general(h)
        idx = pick_state_index(es, StateSelector(selector_value))
        energy = complex(es.eigenvalues[idx])
        if es.is_defective:
            raise DefectiveSpectrumError(
                f"defective spectrum at indices {es.defect_indices}",
                indices=es.defect_indices,
            )
        state = state_from_eigensystem(es, idx, Normalization(norm_value))
        basis = _reference_basis(model, reference, params, h)
        spectrum = mqi(state, basis)
    except (DefectiveSpectrumError, ExceptionalPointError, np.linalg.LinAlgError) as exc:
        return SweepRow(
            value=float(value), second_moment=None, labels=None, intensities=None,
            energy=energy, ep_flag=True, error=str(exc),
        )
    return SweepRow(
        value=float(value),
        second_moment=spectrum.second_moment,
        labels=tuple(float(m) for m in spectrum.labels) if spin else None,
        intensities=tuple(float(i) for i in spectrum.intensities) if spin else None,
        energy=energy,
        ep_flag=False,
    )


_WORKER_BLAS_LIMIT = None


def _init_worker() -> None:
    global _WORKER_BLAS_LIMIT
    _WORKER_BLAS_LIMIT = threadpool_limits(limits=1)


def _pmap(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        with threadpool_limits(limits=1):
            return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def sweep_1d(spec: SweepSpec) -> list[SweepRow]:
    """One SweepRow per grid point, order-preserving, never aborting."""
    fixed_items = tuple(sorted(spec.fixed.items()))
    tasks = [
        (spec.model, fixed_items, spec.sweep_param, v, spec.reference,
         spec.selector.value, spec.normalization.value)
        for v in spec.grid
    ]
    return _pmap(_sweep_point, tasks, spec.workers)


@dataclass(frozen=True)
class PhaseDiagram:
    """F(rho, H2) over a (delta_L/J_L, delta_R/J_R) grid."""

    ratios_left: tuple[float, ...]
    ratios_right: tuple[float, ...]
    second_moment: np.ndarray      # shape (len(ratios_left), len(ratios_right)), NaN where flagged
    ep_flags: np.ndarray
    errors: tuple[tuple[int, int, str], ...] = field(default=())


def _phase_cell(task) -> SweepRow:
    (n, j_l, j_r, dl_ratio, dr_ratio) = task
    fixed = {
        "n": n, "j_l": j_l, "j_r": j_r, "delta_r": dr_ratio * j_r,
    }
    return _sweep_point(("hn_free", tuple(sorted(fixed.items())),
                         "delta_l", dl_ratio * j_l,
                         "h2", StateSelector.GROUND.value,
                         Normalization.TRACE_ONE.value))


def phase_diagram_2d(
    n: int,
    j_left: float,
    j_right: float,
    grid_left,
    grid_right,
    workers: int = 1,
) -> PhaseDiagram:
    """Disorder-free generalized-boundary ring: ground-state F(rho, H2)
    at each (delta_L/J_L, delta_R/J_R) cell."""
    if j_left <= 0 or j_right <= 0:
        raise ValueError("hoppings must be positive")
    gl = tuple(float(x) for x in grid_left)
    gr = tuple(float(x) for x in grid_right)
    tasks = [(n, j_left, j_right, a, b) for a in gl for b in gr]
    rows = _pmap(_phase_cell, tasks, workers)
    f = np.full((len(gl), len(gr)), np.nan)
    flags = np.zeros((len(gl), len(gr)), dtype=bool)
    errors = []
    for (i, j), row in zip(((i, j) for i in range(len(gl)) for j in range(len(gr))), rows):
        if row.ep_flag:
            flags[i, j] = True
            errors.append((i, j, row.error))
        else:
            f[i, j] = row.second_moment
    return PhaseDiagram(
        ratios_left=gl, ratios_right=gr, second_moment=f,
        ep_flags=flags, errors=tuple(errors),
    )


@dataclass(frozen=True)
class EnsembleStats:
    """Disorder-averaged second moment at one disorder strength."""

    w: float
    mean_f: float
    std_f: float
    realizations: int        # successful realizations entering the stats
    excluded: int            # flagged realizations (EP / defective), not averaged
    master_seed: int


def _disorder_realization(task) -> SweepRow:
    (n, j_l, j_r, w, master_seed, global_index) = task
    fixed = {
        "n": n, "j_l": j_l, "j_r": j_r, "delta_l": j_l, "delta_r": j_r,
        "seed": master_seed, "realization_index": global_index,
    }
    return _sweep_point(("hn_disordered", tuple(sorted(fixed.items())), "w", w,
                         "h2", StateSelector.MID_SPECTRUM.value,
                         Normalization.TRACE_ONE.value))


def disorder_ensemble(
    n: int,
    j_left: float,
    j_right: float,
    w_values,
    realizations: int,
    master_seed: int,
    workers: int = 1,
) -> list[EnsembleStats]:
    """Mid-spectrum F(rho, H2) averaged over disorder realizations.

    Boundary hoppings equal the bulk ones (uniform ring). The realization
    key is global (i_W * R + i_r), so no two (W, realization) pairs share a
    draw. Flagged realizations are excluded from the statistics and counted;
    a strength where every realization fails raises EnsembleFailureError.
    """
    if realizations < 1:
        raise ValueError("need at least one realization")
    stats: list[EnsembleStats] = []
    for iw, w in enumerate(float(x) for x in w_values):
        tasks = [
            (n, j_left, j_right, w, master_seed, iw * realizations + ir)
            for ir in range(realizations)
        ]
        rows = _pmap(_disorder_realization, tasks, workers)
        values = np.array([r.second_moment for r in rows if not r.ep_flag])
        excluded = sum(1 for r in rows if r.ep_flag)
        if values.size == 0:
            raise EnsembleFailureError(
                f"all {realizations} realizations failed at W = {w}"
            )
        stats.append(EnsembleStats(
            w=w,
            mean_f=float(values.mean()),
            std_f=float(values.std()),
            realizations=int(values.size),
            excluded=excluded,
            master_seed=master_seed,
        ))
    return stats


@dataclass(frozen=True)
class CriticalPointResult:
    """Refined sweep maximum. ``method`` records how it was obtained:
    parabolic refinement, bare grid argmax (a flagged neighbor), or an
    exceptional-point divergence."""

    location: float
    peak_value: float
    method: str
    grid_step: float


def extract_critical_point(rows: list[SweepRow]) -> CriticalPointResult:
    """Grid argmax of F, refined by a 3-point parabola.

    EP-flagged rows mark genuine divergences: the first flagged row wins
    outright and is reported unrefined. Boundary maxima (monotone sweeps)
    raise NoPeakError.
    """
    if len(rows) < 3:
        raise ValueError("need at least 3 rows to locate a peak")
    values = np.array([r.value for r in rows])
    step = float(np.median(np.diff(values)))

    for r in rows:
        if r.ep_flag:
            return CriticalPointResult(
                location=r.value, peak_value=float("inf"),
                method="exceptional-point", grid_step=step,
            )

    f = np.array([r.second_moment if r.second_moment is not None else -np.inf
                  for r in rows])
    k = int(np.argmax(f))
    if not np.isfinite(f[k]):
        raise NoPeakError("no valid rows in sweep")
    if k == 0 or k == len(rows) - 1:
        raise NoPeakError(
            f"maximum at the grid boundary (index {k}); no interior peak"
        )
    if not (np.isfinite(f[k - 1]) and np.isfinite(f[k + 1])):
        return CriticalPointResult(
            location=float(values[k]), peak_value=float(f[k]),
            method="grid-argmax", grid_step=step,
        )
    x0, x1, x2 = values[k - 1], values[k], values[k + 1]
    y0, y1, y2 = f[k - 1], f[k], f[k + 1]
    den = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
    b = (x2 ** 2 * (y0 - y1) + x1 ** 2 * (y2 - y0) + x0 ** 2 * (y1 - y2)) / den
    if a >= 0:  # flat or degenerate fit: keep the grid cell
        return CriticalPointResult(
            location=float(x1), peak_value=float(y1),
            method="grid-argmax", grid_step=step,
        )
    loc = float(-b / (2 * a))
    peak = float(y1) if not np.isfinite(loc) else float(
        y0 * (loc - x1) * (loc - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (loc - x0) * (loc - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (loc - x0) * (loc - x1) / ((x2 - x0) * (x2 - x1))
    )
    return CriticalPointResult(
        location=loc, peak_value=peak, method="parabolic", grid_step=step,
    )


@dataclass(frozen=True)
class ScanRow:
    """One system size of a finite-size scan."""

    L: int
    inverse_size: float
    critical_point: float
    peak_value: float
    method: str


def finite_size_scan(l_values, fixed: dict, hz_grid, workers: int = 1) -> list[ScanRow]:
    """Sweep h_z and extract the critical point for each chain length."""
    out = []
    for L in l_values:
        spec = SweepSpec(
            model="ising",
            fixed={**fixed, "L": int(L)},
            sweep_param="h_z",
            grid=tuple(hz_grid),
            reference="sz",
            workers=workers,
        )
        rows = sweep_1d(spec)
        cp = extract_critical_point(rows)
        out.append(ScanRow(
            L=int(L), inverse_size=1.0 / int(L),
            critical_point=cp.location, peak_value=cp.peak_value, method=cp.method,
        ))
    return out
