import pytest

from exitbound import (ExitRecord, ExitTimeSample, SimConfig, preset_problem,
                       simulate_batch, to_sde)

# Seed committed for every seeded test in the suite.
ACCEPT_SEED = 20240801


def synth_sample(times, dt=1.0, t_max=None, n_censored=0, problem_id="synthetic",
                 start=(0.5,)):
    """Build an ExitTimeSample from explicit exit times plus censored paths."""
    times = list(times)
    if t_max is None:
        t_max = max(times) if times else 1.0
    records = []
    for i, t in enumerate(times):
        records.append(ExitRecord(path_index=i, steps=int(round(t / dt)), exit_time=t))
    n_steps = int(round(t_max / dt))
    for j in range(n_censored):
        records.append(ExitRecord(path_index=len(times) + j, steps=n_steps, exit_time=None))
    config = SimConfig(dt=dt, t_max=t_max, n_paths=len(records),
                       master_seed=0, start_point=start)
    return ExitTimeSample(records=tuple(records), config=config, problem_id=problem_id)


@pytest.fixture(scope="session")
def interval_problem():
    return preset_problem("interval01")


@pytest.fixture(scope="session")
def ou_problem():
    return preset_problem("ou-interval")


@pytest.fixture(scope="session")
def disk_problem():
    return preset_problem("disk-bm")


@pytest.fixture(scope="session")
def interval_sample_10k(interval_problem):
    """The workhorse batch: interval01, 1e4 paths, dt=1e-4, committed seed."""
    config = SimConfig(dt=1e-4, t_max=6.25, n_paths=10_000, master_seed=ACCEPT_SEED,
                       start_point=(0.5,))
    return simulate_batch(to_sde(interval_problem), interval_problem.domain, config,
                          problem_id="interval01")
