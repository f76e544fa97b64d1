"""Synthetic classification benchmark mirroring the three experimental scenarios.

Each class is a smooth closed curve. Test items are special-affine images of
it, optionally sampled with a different parameterisation and start point, with
Gaussian noise added. Training items are the original curves. Every method
column is a 1-NN classifier under its own distance.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .curves import Curve, bbox_diagonal, load_curve, random_affine
from .errors import CurveInputError, DegenerateGeometryError
from .invariants2d import sa2_invariants
from .invariants3d import j1_j2
from .matching import ClassificationReport, chamfer, chord_resample, nearest_index, resampled_rms, trace_distance
from .potentials import potential_table
from .signatures import local_signature

SCENARIOS = ("same_param", "reparam", "reparam_shifted_start")
METHODS = ("J1", "J2", "global_sig", "local_sig")


@dataclass
class BenchConfig:
    n_classes: int = 20
    variants_per_class: int = 9
    sigma_list: list[float] = field(default_factory=lambda: [1e-6, 2e-6, 4e-6])
    samples_per_curve: int = 5000
    M: int = 100_000
    seed: int = 0
    scenario: str | list[str] = "same_param"
    dim: int = 3
    warp_strength: float = 0.9
    data_dir: str | None = None

    def __post_init__(self):
        for name in ("n_classes", "variants_per_class", "samples_per_curve", "M"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise CurveInputError(f"{name} must be a positive integer")
        if self.samples_per_curve < 16:
            raise CurveInputError("samples_per_curve must be at least 16")
        if not self.sigma_list or any(not (s >= 0) for s in self.sigma_list):
            raise CurveInputError("sigma_list must be a non-empty list of non-negative numbers")
        if self.dim not in (2, 3):
            raise CurveInputError("dim must be 2 or 3")
        if not 0 <= self.warp_strength < 1:
            raise CurveInputError("warp_strength must lie in [0, 1)")
        for s in self.scenarios:
            if s not in SCENARIOS:
                raise CurveInputError(f"unknown scenario {s!r}; choose from {SCENARIOS}")

    @property
    def scenarios(self) -> list[str]:
        return [self.scenario] if isinstance(self.scenario, str) else list(self.scenario)

    @property
    def levels(self) -> list[float]:
        """Noise levels evaluated: a noiseless row followed by sigma_list."""
        return [0.0] + [float(s) for s in self.sigma_list if s > 0]

    @classmethod
    def from_json(cls, path: str | Path) -> "BenchConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CurveInputError(f"cannot read config {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise CurveInputError("config must be a JSON object")
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise CurveInputError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)


# ---------------------------------------------------------------- class curves


class ClosedCurveSampler:
    """Arc-length parameterisation of a densely sampled closed curve."""

    def __init__(self, dense: np.ndarray):
        if np.linalg.norm(dense[0] - dense[-1]) > 1e-9 * bbox_diagonal(dense):
            dense = np.vstack([dense, dense[:1]])
        s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(dense, axis=0), axis=1))])
        if s[-1] <= 0:
            raise DegenerateGeometryError("class curve has zero length")
        self.s = s / s[-1]
        self.dense = dense

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.mod(u, 1.0)
        return np.column_stack([np.interp(u, self.s, self.dense[:, j]) for j in range(self.dense.shape[1])])


def random_trig_curve(rng: np.random.Generator, dim: int, degree: int = 4, n: int = 20000) -> np.ndarray:
    """Closed curve with random trigonometric-polynomial coordinates, unit bbox diagonal."""
    t = np.linspace(0.0, 2 * np.pi, n + 1)
    k = np.arange(1, degree + 1)
    coords = []
    for _ in range(dim):
        a = rng.normal(size=degree) / k
        b = rng.normal(size=degree) / k
        coords.append(np.cos(np.outer(t, k)) @ a + np.sin(np.outer(t, k)) @ b)
    pts = np.column_stack(coords)
    pts[-1] = pts[0]
    return pts / bbox_diagonal(pts)


def class_curves(cfg: BenchConfig, rng: np.random.Generator) -> list[ClosedCurveSampler]:
    if cfg.data_dir is None:
        return [ClosedCurveSampler(random_trig_curve(rng, cfg.dim)) for _ in range(cfg.n_classes)]
    files = sorted(p for p in Path(cfg.data_dir).iterdir() if p.suffix in (".csv", ".json"))
    if len(files) < cfg.n_classes:
        raise CurveInputError(f"{cfg.data_dir} holds {len(files)} curves, config asks for {cfg.n_classes}")
    out = []
    for p in files[: cfg.n_classes]:
        c = load_curve(p)
        if c.dim != cfg.dim:
            raise CurveInputError(f"{p.name} has dimension {c.dim}, config asks for {cfg.dim}")
        out.append(ClosedCurveSampler(c.points / c.scale))
    return out


def random_warp(rng: np.random.Generator, strength: float):
    """Monotone map of [0, 1] fixing both ends.

    Composition of two maps s + a sin(2 pi k s) / (2 pi k) with |a| < 1.
    """
    parts = [
        (strength * rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0]), int(rng.integers(1, 4))) for _ in range(2)
    ]

    def warp(s):
        for a, k in parts:
            s = s + a * np.sin(2 * np.pi * k * s) / (2 * np.pi * k)
        return s

    return warp


# ---------------------------------------------------------------- features


@dataclass
class Features:
    j1: np.ndarray
    j2: np.ndarray
    global_sig: np.ndarray
    local_sig: np.ndarray | None


def features(points: np.ndarray, M: int) -> Features:
    curve = Curve(points)
    table = potential_table(curve)
    if curve.dim == 2:
        sa = sa2_invariants(table)
        a, b = sa["I1"].values, sa["I2"].values
    else:
        a, b = j1_j2(table)
    sig = np.column_stack([a, b])
    try:
        loc = local_signature(curve, M).points
    except DegenerateGeometryError:
        loc = None
    return Features(a, b, chord_resample(sig), loc)


def _distance(method: str, x: Features, y: Features) -> float:
    if method == "J1":
        return trace_distance(x.j1, y.j1)
    if method == "J2":
        return trace_distance(x.j2, y.j2)
    if method == "global_sig":
        return resampled_rms(x.global_sig, y.global_sig)
    if x.local_sig is None or y.local_sig is None:
        return np.inf
    return chamfer(x.local_sig, y.local_sig)


# ---------------------------------------------------------------- runner


@dataclass
class BenchResult:
    config: BenchConfig
    tables: dict[str, dict[str, list[float]]]
    reports: dict[str, dict[str, list[ClassificationReport]]]
    seconds: float

    def error_rate(self, scenario: str, method: str, level: int) -> float:
        return self.tables[scenario][method][level]

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "sigma": self.config.levels,
            "tables": self.tables,
            "reports": {
                scn: {m: [r.to_dict() for r in reps] for m, reps in by_method.items()}
                for scn, by_method in self.reports.items()
            },
        }

    def format_table(self) -> str:
        lines = []
        header = f"{'sigma':>10} " + " ".join(f"{m:>11}" for m in METHODS)
        for scn, table in self.tables.items():
            lines.append(f"scenario: {scn}")
            lines.append(header)
            for i, sigma in enumerate(self.config.levels):
                lines.append(f"{sigma:>10.4g} " + " ".join(f"{table[m][i]:>11.4f}" for m in METHODS))
        return "\n".join(lines)


def run_bench(cfg: BenchConfig) -> BenchResult:
    start = time.perf_counter()
    root = np.random.SeedSequence(cfg.seed)
    class_seq, variant_seq = root.spawn(2)
    classes = class_curves(cfg, np.random.default_rng(class_seq))
    n = cfg.samples_per_curve
    grid = np.linspace(0.0, 1.0, n)
    train = [features(c(grid), cfg.M) for c in classes]

    # one draw per (class, variant) shared by all scenarios and noise levels
    plans = []
    for ci, seq in enumerate(variant_seq.spawn(cfg.n_classes)):
        for vseq in seq.spawn(cfg.variants_per_class):
            rng = np.random.default_rng(vseq)
            g = random_affine(cfg.dim, "special", rng)
            warp = random_warp(rng, cfg.warp_strength)
            shift = rng.uniform(0.1, 0.9)
            eps = rng.standard_normal((n, cfg.dim))
            plans.append((ci, g, warp, shift, eps))

    tables: dict[str, dict[str, list[float]]] = {}
    reports: dict[str, dict[str, list[ClassificationReport]]] = {}
    for scn in cfg.scenarios:
        tables[scn] = {m: [] for m in METHODS}
        reports[scn] = {m: [] for m in METHODS}
        clean = []
        for ci, g, warp, shift, eps in plans:
            if scn == "same_param":
                u = grid
            elif scn == "reparam":
                u = warp(grid)
            else:
                u = shift + warp(grid)
            pts = g.apply(classes[ci](u))
            clean.append((ci, pts, eps))
        for sigma in cfg.levels:
            feats = []
            for ci, pts, eps in clean:
                noisy = pts + sigma * bbox_diagonal(pts) * eps
                noisy[-1] = noisy[0]
                feats.append((ci, features(noisy, cfg.M)))
            for m in METHODS:
                predicted, true = [], []
                for ci, f in feats:
                    d = np.array([_distance(m, f, ref) for ref in train])
                    predicted.append(nearest_index(d))
                    true.append(ci)
                rep = ClassificationReport(predicted, true)
                tables[scn][m].append(rep.error_rate)
                reports[scn][m].append(rep)
    return BenchResult(cfg, tables, reports, time.perf_counter() - start)
