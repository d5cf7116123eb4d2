import pytest

from nsreg.fields import GridSpec, gen_random_field, gen_random_solenoidal


@pytest.fixture(scope="session")
def grid8():
    return GridSpec(8)


@pytest.fixture(scope="session")
def grid16():
    return GridSpec(16)


@pytest.fixture(scope="session")
def grid32():
    return GridSpec(32)


@pytest.fixture(scope="session")
def corpus16(grid16):
    return [gen_random_solenoidal(grid16, s) for s in range(20)]


@pytest.fixture(scope="session")
def raw16(grid16):
    return [gen_random_field(grid16, s) for s in range(20)]


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def beltrami_run(grid16):
    from nsreg.criteria import builtin_bkm_classic, builtin_paper_criterion, builtin_serrin
    from nsreg.fields import gen_beltrami
    from nsreg.solver import SolverConfig, run

    cfg = SolverConfig(grid16, viscosity=0.1, dt=1e-3, horizon=1.0, save_every=10)
    monitors = [builtin_paper_criterion(), builtin_bkm_classic(), builtin_serrin(6.0)]
    return run(cfg, gen_beltrami(grid16, 1), monitors)


@pytest.fixture(scope="session")
def taylor_green_run(grid32):
    from nsreg.fields import gen_taylor_green
    from nsreg.solver import SolverConfig, run

    cfg = SolverConfig(grid32, viscosity=0.01, dt=2e-3, horizon=0.5, save_every=5)
    return run(cfg, gen_taylor_green(grid32))
