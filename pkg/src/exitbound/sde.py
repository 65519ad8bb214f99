"""Euler-Maruyama first-exit-time simulation with reproducible parallel streams.

Randomness contract (fixed per release): path i of a run with master seed s
draws from numpy's Philox4x64-10 counter-based generator seeded with
SeedSequence(s, spawn_key=(i,)); standard normals are produced by numpy's
ziggurat transform of that bit stream, consumed in step order (for 2-D
problems, step k uses draws 2k and 2k+1).  Draws therefore never depend on
worker count, block size, or scheduling.

Exit detection is the naive discrete check: the path exits at the first
step k whose state lies outside the open domain, and the recorded exit time
is k*dt.  No boundary-bridge correction is applied, so exit times carry an
upward bias of order sqrt(dt).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import Domain, DriftDiffusionField

# Cap on floats drawn per normal-generation block (memory bound).
_BLOCK_BUDGET = 1 << 23
_BLOCK_MAX = 1024


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one exit-time batch; immutable and hashable provenance."""

    dt: float
    t_max: float
    n_paths: int
    master_seed: int
    start_point: tuple[float, ...]

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.t_max < self.dt:
            raise ConfigurationError("t_max must be at least dt")
        if self.n_paths < 1:
            raise ConfigurationError("n_paths must be >= 1")
        if not (0 <= int(self.master_seed) < 2 ** 64):
            raise ConfigurationError("master_seed must fit in 64 unsigned bits")
        object.__setattr__(self, "start_point", tuple(float(c) for c in self.start_point))

    @property
    def n_steps_max(self) -> int:
        return max(1, int(round(self.t_max / self.dt)))


@dataclass(frozen=True)
class ExitRecord:
    """Outcome of one path: exit time (a multiple of dt) or censored at the horizon."""

    path_index: int
    steps: int
    exit_time: float | None

    @property
    def censored(self) -> bool:
        return self.exit_time is None


@dataclass(frozen=True)
class ExitTimeSample:
    """A batch of exit records plus full provenance."""

    records: tuple[ExitRecord, ...]
    config: SimConfig
    problem_id: str

    def exit_times(self) -> np.ndarray:
        """Exit times as floats with +inf standing in for censored paths."""
        out = np.array([np.inf if r.censored else r.exit_time for r in self.records])
        return out

    @property
    def censored_fraction(self) -> float:
        return sum(r.censored for r in self.records) / len(self.records)


def path_generator(master_seed: int, path_index: int) -> np.random.Generator:
    """The dedicated generator of one path; independent of all other paths."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(path_index,))
    return np.random.Generator(np.random.Philox(seq))


def step(x: np.ndarray, field: DriftDiffusionField, dt: float,
         gaussian: np.ndarray) -> np.ndarray:
    """One Euler-Maruyama update x' = x + b(x) dt + sigma(x) sqrt(dt) g.

    x and gaussian have shape (n, dim); no domain check is performed.
    """
    sigma = field.noise_scale(x)
    return x + field.drift(x) * dt + (sigma * np.sqrt(dt))[:, None] * gaussian


def _check_start(domain: Domain, config: SimConfig) -> np.ndarray:
    start = np.asarray(config.start_point, dtype=float)
    if start.shape != (domain.dimension,):
        raise ConfigurationError(
            f"start point has dimension {start.shape}, domain needs {domain.dimension}")
    if not domain.contains(start):
        raise ConfigurationError(f"start point {config.start_point} is not inside the domain")
    return start


def simulate_path(field: DriftDiffusionField, domain: Domain, config: SimConfig,
                  path_index: int, _normals: np.ndarray | None = None) -> ExitRecord:
    """Simulate a single path; deterministic in (master_seed, path_index, config).

    _normals injects an explicit (n_steps, dim) draw sequence for tests.
    """
    start = _check_start(domain, config)
    dim = domain.dimension
    gen = path_generator(config.master_seed, path_index)
    x = start.reshape(1, dim).copy()
    n_max = config.n_steps_max
    for k in range(1, n_max + 1):
        if _normals is not None:
            g = np.asarray(_normals[k - 1], dtype=float).reshape(1, dim)
        else:
            g = gen.standard_normal((1, dim))
        x = step(x, field, config.dt, g)
        if not domain.contains(x)[0]:
            return ExitRecord(path_index=path_index, steps=k, exit_time=k * config.dt)
    return ExitRecord(path_index=path_index, steps=n_max, exit_time=None)


def _simulate_range(field: DriftDiffusionField, domain: Domain, config: SimConfig,
                    lo: int, hi: int, start: np.ndarray) -> np.ndarray:
    """Exit step for paths [lo, hi); 0 marks a censored path."""
    m = hi - lo
    dim = domain.dimension
    dt = config.dt
    sqrt_dt = np.sqrt(dt)
    n_max = config.n_steps_max

    gens = [path_generator(config.master_seed, i) for i in range(lo, hi)]
    x = np.tile(start, (m, 1))
    local = np.arange(m)
    exit_step = np.zeros(m, dtype=np.int64)

    done_steps = 0
    while len(local) and done_steps < n_max:
        m_alive = len(local)
        block = min(_BLOCK_MAX, n_max - done_steps,
                    max(64, _BLOCK_BUDGET // (m_alive * dim)))
        draws = np.empty((m_alive, block, dim))
        for row, idx in enumerate(local):
            draws[row] = gens[idx].standard_normal((block, dim))

        alive = np.ones(m_alive, dtype=bool)
        first_exit = np.zeros(m_alive, dtype=np.int64)
        for j in range(block):
            drift = field.drift(x)
            sigma = field.noise_scale(x)
            x_new = x + drift * dt + (sigma * sqrt_dt)[:, None] * draws[:, j, :]
            # freeze rows that already exited so fields are never evaluated
            # far outside the bounding box
            x = np.where(alive[:, None], x_new, x)
            outside = ~domain.contains(x) & alive
            if outside.any():
                first_exit[outside] = done_steps + j + 1
                alive &= ~outside

        exited = first_exit > 0
        exit_step[local[exited]] = first_exit[exited]
        keep = ~exited
        x = x[keep]
        local = local[keep]
        done_steps += block

    return exit_step


def simulate_batch(field: DriftDiffusionField, domain: Domain, config: SimConfig,
                   problem_id: str = "custom", workers: int = 1) -> ExitTimeSample:
    """Simulate all paths of the batch; output is identical for any worker count."""
    start = _check_start(domain, config)
    n = config.n_paths
    workers = max(1, min(int(workers), n))

    bounds = np.linspace(0, n, workers + 1).astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if workers == 1:
        parts = [_simulate_range(field, domain, config, a, b, start) for a, b in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_range, field, domain, config, a, b, start)
                       for a, b in chunks]
            parts = [f.result() for f in futures]
    exit_step = np.concatenate(parts)

    n_max = config.n_steps_max
    records = tuple(
        ExitRecord(path_index=i, steps=int(k) if k > 0 else n_max,
                   exit_time=float(k * config.dt) if k > 0 else None)
        for i, k in enumerate(exit_step)
    )
    return ExitTimeSample(records=records, config=config, problem_id=problem_id)


def sample_to_tsv(sample: ExitTimeSample) -> str:
    """Raw-sample dump: header with provenance, then one `index<TAB>time` row per path."""
    cfg = sample.config
    start = ",".join(repr(c) for c in cfg.start_point)
    lines = [
        f"# problem={sample.problem_id}\tdt={cfg.dt!r}\tt_max={cfg.t_max!r}"
        f"\tseed={cfg.master_seed}\tstart={start}"
    ]
    for r in sample.records:
        value = "CENSORED" if r.censored else repr(r.exit_time)
        lines.append(f"{r.path_index}\t{value}")
    return "\n".join(lines) + "\n"


def write_sample(sample: ExitTimeSample, path) -> None:
    with open(path, "w") as fh:
        fh.write(sample_to_tsv(sample))
