"""Simulated multivariate spatial data on a regular grid.

Data follow ``X = (R_o B_o + R_u B_u + S) V' + E`` where ``R_o`` and
``R_u`` are observed and unmeasured covariates (smooth random fields),
``S`` is a mean-zero Gaussian field with exponential covariance, ``V``
holds orthonormal loadings and ``E`` is white noise. Four scenarios switch
the unmeasured-covariate and spatial terms on or off:

=========  ==================  ===============
scenario   unmeasured ``R_u``  spatial ``S``
=========  ==================  ===============
A          no                  no
B          yes                 no
C          no                  yes
D          yes                 yes
=========  ==================  ===============
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidInputError, SolverFailureError

SCENARIOS = {"A": (False, False), "B": (True, False), "C": (False, True), "D": (True, True)}

_ARRAY_FIELDS = ("b_o", "b_u", "v")


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one simulation scenario.

    ``b_o`` (c_o x q), ``b_u`` (c_u x q) and ``v`` (p x q) are fixed
    parameters; ``b_u`` only enters scenarios B and D. Covariate fields use
    range ``covariate_range`` (default twice ``field_range``) and unit sill.
    """

    scenario: str
    b_o: np.ndarray
    b_u: np.ndarray
    v: np.ndarray
    name: str = ""
    grid_side: int = 50
    n_monitor: int = 400
    n_new: int = 100
    mcar_level: float = 0.2
    field_range: float = 10.0
    field_sill: float = 1.0
    covariate_range: float | None = None
    noise_sd: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for nm in _ARRAY_FIELDS:
            object.__setattr__(self, nm, np.atleast_2d(np.asarray(getattr(self, nm), dtype=float)))
        if self.scenario not in SCENARIOS:
            raise InvalidInputError(f"scenario must be one of A-D, got {self.scenario!r}")
        if not 0 <= self.mcar_level <= 0.95:
            raise InvalidInputError(f"mcar_level must be in [0, 0.95], got {self.mcar_level}")
        if self.n_monitor < 1 or self.n_new < 0:
            raise InvalidInputError("need at least one monitor and a nonnegative new-site count")
        if self.n_monitor + self.n_new > self.grid_side ** 2:
            raise InvalidInputError("n_monitor + n_new exceeds the number of grid points")
        if self.field_range <= 0 or self.field_sill < 0 or self.noise_sd < 0:
            raise InvalidInputError("field_range must be positive; sill and noise_sd nonnegative")
        q = self.v.shape[1]
        if self.v.shape[0] < q:
            raise InvalidInputError("loadings v must have at least as many rows as columns")
        if not np.allclose(self.v.T @ self.v, np.eye(q), atol=1e-8):
            raise InvalidInputError("loadings v must have orthonormal columns")
        if self.b_o.shape[1] != q or self.b_u.shape[1] != q:
            raise InvalidInputError(f"b_o and b_u must have {q} columns")

    @property
    def p(self) -> int:
        return self.v.shape[0]

    @property
    def q(self) -> int:
        return self.v.shape[1]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for nm in _ARRAY_FIELDS:
            d[nm] = getattr(self, nm).tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidInputError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        return cls(**d)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def load_config(path) -> ScenarioConfig:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return ScenarioConfig.from_dict(d)


def save_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def preset_names() -> list:
    files = resources.files("spatialmc.presets").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def load_preset(name: str) -> ScenarioConfig:
    """Load one of the shipped presets, e.g. ``"toy-C"`` or ``"high-A"``."""
    res = resources.files("spatialmc.presets") / f"{name}.json"
    if not res.is_file():
        raise InvalidInputError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return ScenarioConfig.from_dict(json.loads(res.read_text()))


@dataclass
class SimulatedDataset:
    """One simulated replicate.

    Rows ``0..n_monitor-1`` of ``coords``/``x_true``/``r_o`` are monitoring
    sites; the remaining rows are new sites with no observations.
    ``x_masked`` and ``mask`` cover monitor rows only; hidden entries of
    ``x_masked`` are NaN.
    """

    config: ScenarioConfig
    coords: np.ndarray
    x_true: np.ndarray
    x_masked: np.ndarray
    mask: np.ndarray
    r_o: np.ndarray
    ro_bo: np.ndarray = field(repr=False, default=None)
    ru_bu: np.ndarray = field(repr=False, default=None)
    s: np.ndarray = field(repr=False, default=None)

    @property
    def n_monitor(self) -> int:
        return self.config.n_monitor

    @property
    def monitor_coords(self):
        return self.coords[: self.n_monitor]

    @property
    def new_coords(self):
        return self.coords[self.n_monitor:]

    @property
    def x_monitor(self):
        return self.x_true[: self.n_monitor]

    @property
    def x_new(self):
        return self.x_true[self.n_monitor:]

    @property
    def r_o_monitor(self):
        return self.r_o[: self.n_monitor]

    @property
    def r_o_new(self):
        return self.r_o[self.n_monitor:]


def grid_coords(side: int) -> np.ndarray:
    """Integer lattice ``{0..side-1}^2`` in row-major order."""
    i, j = np.divmod(np.arange(side * side), side)
    return np.column_stack([i, j]).astype(float)


def exponential_covariance(coords, range_, sill) -> np.ndarray:
    d = cdist(coords, coords)
    return sill * np.exp(-d / range_)


def _cholesky(cov, sill):
    n = len(cov)
    jitter = 1e-8 * sill
    while jitter <= 1e-4 * sill * (1 + 1e-9):
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            jitter *= 10
    raise SolverFailureError("covariance factorization failed at the largest jitter")


def gen_gaussian_field(coords, range_, sill, seed=None, size=None) -> np.ndarray:
    """Draw from a mean-zero Gaussian field with exponential covariance.

    ``Cov(s_i, s_j) = sill * exp(-d_ij / range_)``, sampled through a
    Cholesky factor with diagonal jitter ``1e-8 * sill`` (raised tenfold
    up to ``1e-4 * sill`` if needed).

    Parameters
    ----------
    coords : array_like, shape (n, 2)
    range_ : float
    sill : float
    seed : int, Generator or None
    size : int, optional
        Number of independent draws. Output has shape (n,) when omitted,
        else (n, size).
    """
    c = np.asarray(coords, dtype=float)
    if c.ndim != 2:
        raise InvalidInputError("coords must be 2-D")
    if range_ <= 0 or sill < 0:
        raise InvalidInputError("range must be positive and sill nonnegative")
    rng = np.random.default_rng(seed)
    k = 1 if size is None else int(size)
    eps = rng.standard_normal((len(c), k))
    if sill == 0:
        out = np.zeros((len(c), k))
    else:
        out = _cholesky(exponential_covariance(c, range_, sill), sill) @ eps
    return out[:, 0] if size is None else out


def apply_mcar(x, level, seed=None, exact=True):
    """Hide entries completely at random, column by column.

    With ``exact`` (default) each column loses exactly ``round(level * n)``
    uniformly chosen entries; otherwise each entry is hidden independently
    with probability ``level``. Both draw one uniform per entry, so for a
    fixed seed the hidden sets are nested in ``level``.

    Returns
    -------
    x_masked : ndarray
        Copy of ``x`` with hidden entries set to NaN.
    mask : ndarray of bool
        True where observed.
    """
    x = np.asarray(x, dtype=float)
    if not 0 <= level <= 0.95:
        raise InvalidInputError(f"MCAR level must be in [0, 0.95], got {level}")
    rng = np.random.default_rng(seed)
    u = rng.random(x.shape)
    if exact:
        n_hide = int(round(level * x.shape[0]))
        order = np.argsort(u, axis=0, kind="stable")
        mask = np.ones(x.shape, dtype=bool)
        np.put_along_axis(mask, order[:n_hide], False, axis=0)
    else:
        mask = u >= level
    return np.where(mask, x, np.nan), mask


def gen_dataset(cfg: ScenarioConfig, seed=None) -> SimulatedDataset:
    """Generate one replicate for ``cfg``.

    ``seed`` overrides ``cfg.seed``; it may be an int, a sequence of ints
    or a ``SeedSequence``. Independent streams are spawned for site
    selection, covariates, the spatial term, noise and the mask, so
    changing ``mcar_level`` alters only the mask.
    """
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(
        cfg.seed if seed is None else seed)
    s_sites, s_cov, s_spatial, s_noise, s_mask = (np.random.default_rng(c) for c in root.spawn(5))
    unmeasured, spatial = SCENARIOS[cfg.scenario]

    n = cfg.n_monitor + cfg.n_new
    sites = s_sites.choice(cfg.grid_side ** 2, size=n, replace=False)
    coords = grid_coords(cfg.grid_side)[sites]

    cov_range = cfg.covariate_range or 2 * cfg.field_range
    c_o, c_u = cfg.b_o.shape[0], cfg.b_u.shape[0]
    r_all = gen_gaussian_field(coords, cov_range, 1.0, s_cov, size=c_o + c_u)
    r_o, r_u = r_all[:, :c_o], r_all[:, c_o:]

    ro_bo = r_o @ cfg.b_o
    ru_bu = r_u @ cfg.b_u if unmeasured else np.zeros_like(ro_bo)
    if spatial:
        s = gen_gaussian_field(coords, cfg.field_range, cfg.field_sill, s_spatial, size=cfg.q)
    else:
        s = np.zeros_like(ro_bo)
    noise = cfg.noise_sd * s_noise.standard_normal((n, cfg.p))
    x_true = (ro_bo + ru_bu + s) @ cfg.v.T + noise

    x_masked, mask = apply_mcar(x_true[: cfg.n_monitor], cfg.mcar_level, s_mask)
    return SimulatedDataset(cfg, coords, x_true, x_masked, mask, r_o, ro_bo, ru_bu, s)
