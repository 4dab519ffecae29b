import asyncio
import logging
import time
import typing
from concurrent.futures import Executor, ProcessPoolExecutor
from drham.checks import TARGETS, checks_for
from drham.constants import (DEFAULT_CASES, DEFAULT_DEGREE_CAP, DEFAULT_GENUS, DEFAULT_JOBS, DEFAULT_SEED,
                             EXIT_CHECK_FAILED, EXIT_CONFIGURATION, EXIT_OK, MUTATIONS, VERDICT_ERROR, VERDICT_FAIL,
                             VERDICT_PASS)
from drham.fault import ConfigurationError, DRHamError, ModelFileError
from drham.properties import SUITES, mutation, run_property, suite_names
from drham.serialization.model import load_model
from drham.serialization.report import CheckResult, Report, save_report

log = logging.getLogger(__name__)


class RunConfig(typing.NamedTuple):
    genus: int = DEFAULT_GENUS
    seed: int = DEFAULT_SEED
    json: typing.Optional[str] = None
    jobs: int = DEFAULT_JOBS
    g_file: typing.Optional[str] = None
    d_max: typing.Optional[int] = None
    depth: typing.Optional[int] = None
    suite: typing.Optional[str] = None
    cases: int = DEFAULT_CASES
    mutate: typing.Optional[str] = None
    timings: bool = False
    degree_cap: int = DEFAULT_DEGREE_CAP

    @property
    def max_eps(self) -> int:
        return 2 * self.genus

    def validate(self) -> 'RunConfig':
        if self.genus < 1:
            raise ConfigurationError(f"--genus must be at least 1 (eps-order 2), got {self.genus}")
        if self.jobs < 1:
            raise ConfigurationError(f"--jobs must be at least 1, got {self.jobs}")
        if self.d_max is not None and self.d_max < -1:
            raise ConfigurationError(f"--d-max must be at least -1, got {self.d_max}")
        if self.depth is not None and self.depth < 1:
            raise ConfigurationError(f"--depth must be positive, got {self.depth}")
        if self.cases < 1:
            raise ConfigurationError(f"--cases must be positive, got {self.cases}")
        if self.degree_cap < 1:
            raise ConfigurationError(f"--degree-cap must be positive, got {self.degree_cap}")
        if self.mutate is not None and self.mutate not in MUTATIONS:
            raise ConfigurationError(f"unknown mutation {self.mutate}, expected one of {', '.join(MUTATIONS)}")
        suite_names(self.suite)
        return self

    def report_config(self) -> typing.Dict[str, typing.Any]:
        """The settings that determine report contents; parallelism and output paths are left out."""
        return {
            "genus": self.genus,
            "seed": self.seed,
            "d_max": self.d_max,
            "depth": self.depth,
            "degree_cap": self.degree_cap,
            "g_file": self.g_file,
            "suite": self.suite,
            "cases": self.cases,
            "mutate": self.mutate,
        }


def execute_check(target: str, index: int, cfg: RunConfig) -> CheckResult:
    """Run one check of a target table, turning unexpected errors into an error entry."""
    check = checks_for(target, cfg)[index]
    started = time.perf_counter()
    try:
        outcome = check.run()
    except (ConfigurationError, ModelFileError):
        raise
    except Exception as err:
        log.exception("check %s raised", check.name)
        return CheckResult(check.name, check.scope, VERDICT_ERROR, None, f"{type(err).__name__}: {err}",
                           time.perf_counter() - started if cfg.timings else None)
    elapsed = time.perf_counter() - started
    log.debug("%s: %s in %.2fs", check.name, "pass" if outcome.passed else "fail", elapsed)
    return CheckResult(
        check.name, check.scope, VERDICT_PASS if outcome.passed else VERDICT_FAIL, outcome.residual,
        outcome.detail, elapsed if cfg.timings else None
    )


def execute_property(suite: str, index: int, cfg: RunConfig) -> CheckResult:
    with mutation(cfg.mutate):
        return run_property(suite, SUITES[suite][index], cfg.cases, cfg.seed, cfg.timings)


class Verifier:
    def __init__(self, cfg: RunConfig) -> None:
        self.cfg = cfg

    def _executor(self) -> typing.Optional[Executor]:
        if self.cfg.jobs == 1:
            return None
        return ProcessPoolExecutor(max_workers=self.cfg.jobs)

    async def _gather(self, fn: typing.Callable[[str, int, RunConfig], CheckResult],
                      jobs: typing.List[typing.Tuple[str, int]]) -> typing.List[CheckResult]:
        executor = self._executor()
        if executor is None:
            return [fn(name, index, self.cfg) for name, index in jobs]
        loop = asyncio.get_running_loop()
        with executor:
            futures = [loop.run_in_executor(executor, fn, name, index, self.cfg) for name, index in jobs]
            return list(await asyncio.gather(*futures))

    async def verify(self, target: str) -> Report:
        """
        Check the bihamiltonian structure of a builtin theory.

        targets: kdv, rspin3, rspin4, rspin5, cp1, genus0, central, lemma, all

        Each check reports pass, fail (with a residual witness) or error, together with
        the scope it was decided in: exact, eps-order k, or eps-order k and u-degree D.
        rspin5 compares with the DR side only when --g-file names a model file.
        """
        if target in ('rspin5', 'all') and self.cfg.g_file is not None:
            load_model(self.cfg.g_file)
        checks = checks_for(target, self.cfg)
        log.info("verifying %s: %i checks on %i workers", target, len(checks), self.cfg.jobs)
        results = await self._gather(execute_check, [(target, i) for i in range(len(checks))])
        return Report(target, self.cfg.report_config(), tuple(results))

    async def properties(self) -> Report:
        """
        Run the randomized property suites, deterministically for a given --seed.

        suites: algebra, variational, omega, euler, lshift, operators, schouten, homotopy,
                pdo, shift, miura, file, lemma

        --mutate adjoint_sign flips the sign of the operator adjoint as a negative control.
        """
        jobs = [(suite, i) for suite in suite_names(self.cfg.suite) for i in range(len(SUITES[suite]))]
        results = await self._gather(execute_property, jobs)
        return Report(self.cfg.suite or "properties", self.cfg.report_config(), tuple(results))

    @classmethod
    def get_annotations(cls, command: str) -> typing.Tuple[typing.Dict[str, typing.Any], typing.Optional[str]]:
        if command == "verify":
            return cls.verify.__annotations__, cls.verify.__doc__
        if command == "properties":
            return cls.properties.__annotations__, cls.properties.__doc__
        raise ConfigurationError(f"\"{command}\" is not a recognized command")


cli_commands = [
    'verify',
    'properties',
]


def run_cli(method: str, cfg: RunConfig, args: typing.Sequence[str],
            loop: typing.Optional[asyncio.AbstractEventLoop] = None) -> int:
    own_loop = loop is None
    loop = loop or asyncio.new_event_loop()
    try:
        if method not in cli_commands:
            raise ConfigurationError(f"\"{method}\" is not a recognized command")
        cfg = cfg.validate()
        verifier = Verifier(cfg)
        if method == 'verify':
            if not args:
                raise ConfigurationError(f"verify needs a target, one of {', '.join(TARGETS + ('all',))}")
            report = loop.run_until_complete(verifier.verify(args[0]))
        else:
            report = loop.run_until_complete(verifier.properties())
        print(report.as_text())
        if cfg.json:
            save_report(cfg.json, report)
    except DRHamError as err:
        print("drham encountered an error: %s" % str(err))
        return EXIT_CONFIGURATION
    finally:
        if own_loop:
            loop.close()

    return EXIT_OK if report.passed else EXIT_CHECK_FAILED
