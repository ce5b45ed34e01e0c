"""Native timing of kernel F (algebraic) against kernel P (self-mutating).

Both kernels compute ``x = x*x + x*2`` with the mesh library directly; F
builds fresh intermediates, P updates in place with one temporary.  Each
repetition runs ``total_updates / mesh size`` kernel calls, so every mesh
size performs the same number of element updates.
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import mesh as M
from .mesh import Mesh

TOTAL_UPDATES = 16_777_216


def kernel_f(x: Mesh) -> None:
    x.assign(x * x + x * 2.0)


def kernel_p(x: Mesh) -> None:
    t = x.copy()
    t.umult(2.0)
    x.umult_elem(x)
    x.uplus(t)


KERNELS = {"F": kernel_f, "P": kernel_p}


@dataclass
class BenchConfig:
    sizes: tuple[int, ...] = (8, 16, 32, 64)
    total_updates: int = TOTAL_UPDATES
    reps: int = 5
    precision: str = "single"
    seed: int = 20240601
    rank: int = 3

    def __post_init__(self):
        if not self.sizes or any(n < 1 for n in self.sizes):
            raise ValueError(f"sizes must be positive, got {self.sizes}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.precision not in M.PRECISIONS:
            raise ValueError(f"unknown precision {self.precision!r}")

    def iterations(self, n: int) -> int:
        return max(1, self.total_updates // n**self.rank)


@dataclass
class BenchRow:
    size: int
    kernel: str
    iterations: int
    median_seconds: float
    times: list[float]
    meshes_created: int


@dataclass
class BenchReport:
    config: BenchConfig
    rows: list[BenchRow] = field(default_factory=list)
    outputs_equal: dict[int, bool] = field(default_factory=dict)

    def row(self, size: int, kernel: str) -> BenchRow:
        return next(r for r in self.rows if r.size == size and r.kernel == kernel)

    def ratio(self, size: int) -> float:
        return self.row(size, "F").median_seconds / self.row(size, "P").median_seconds

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "rows": [asdict(r) for r in self.rows],
            "ratios": {str(n): self.ratio(n) for n in self.config.sizes},
            "outputs_equal": {str(n): ok for n, ok in self.outputs_equal.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        c = self.config
        lines = [
            f"precision={c.precision} reps={c.reps} seed={c.seed} total_updates={c.total_updates}",
            f"{'size':>6} {'iters':>8} {'F median s':>12} {'P median s':>12} {'F/P':>6} {'F meshes':>9} {'P meshes':>9} {'equal':>6}",
        ]
        for n in c.sizes:
            f, p = self.row(n, "F"), self.row(n, "P")
            lines.append(
                f"{f'{n}^{c.rank}':>6} {f.iterations:>8} {f.median_seconds:>12.6f} {p.median_seconds:>12.6f}"
                f" {self.ratio(n):>6.2f} {f.meshes_created:>9} {p.meshes_created:>9} {str(self.outputs_equal[n]):>6}"
            )
        return "\n".join(lines) + "\n"


def initial_mesh(n: int, cfg: BenchConfig) -> Mesh:
    # values in (-1.5, -0.5) keep x*x + 2x inside [-1, 0] under iteration
    rng = np.random.default_rng(cfg.seed)
    data = rng.uniform(-1.5, -0.5, size=(n,) * cfg.rank)
    return M.from_array(data, dtype=M.PRECISIONS[cfg.precision])


def _time(kernel, x: Mesh, iterations: int) -> float:
    start = time.perf_counter()
    for _ in range(iterations):
        kernel(x)
    return time.perf_counter() - start


def bench_native(cfg: BenchConfig) -> BenchReport:
    report = BenchReport(cfg)
    for n in cfg.sizes:
        iterations = cfg.iterations(n)
        outputs, created = {}, {}
        for name, kernel in KERNELS.items():
            x = initial_mesh(n, cfg)
            with M.alloc_scope() as stats:
                kernel(x)
            outputs[name] = x
            created[name] = stats.meshes_created
        # interleave the kernels so load drift on the machine hits both alike
        times: dict[str, list[float]] = {name: [] for name in KERNELS}
        for _ in range(cfg.reps):
            for name, kernel in KERNELS.items():
                times[name].append(_time(kernel, initial_mesh(n, cfg), iterations))
        for name in KERNELS:
            ts = times[name]
            report.rows.append(BenchRow(n, name, iterations, statistics.median(ts), ts, created[name]))
        report.outputs_equal[n] = outputs["F"].bits_equal(outputs["P"])
    return report
