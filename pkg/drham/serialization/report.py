import json
import logging
import typing
from drham.constants import REPORT_SCHEMA, VERDICT_ERROR, VERDICT_FAIL, VERDICT_PASS
from drham.fault import ConfigurationError

log = logging.getLogger(__name__)

Json = typing.Dict[str, typing.Any]


class CheckResult(typing.NamedTuple):
    name: str
    scope: str
    verdict: str
    residual: typing.Optional[str] = None
    detail: typing.Optional[str] = None
    wall_time: typing.Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.verdict == VERDICT_PASS

    def as_dict(self) -> Json:
        return {
            "name": self.name,
            "scope": self.scope,
            "verdict": self.verdict,
            "residual": self.residual,
            "detail": self.detail,
            "wall_time": None if self.wall_time is None else round(self.wall_time, 3),
        }


class Report(typing.NamedTuple):
    target: str
    config: Json
    checks: typing.Tuple[CheckResult, ...]

    @property
    def verdict(self) -> str:
        verdicts = {c.verdict for c in self.checks}
        if VERDICT_ERROR in verdicts:
            return VERDICT_ERROR
        if VERDICT_FAIL in verdicts:
            return VERDICT_FAIL
        return VERDICT_PASS

    @property
    def passed(self) -> bool:
        return self.verdict == VERDICT_PASS

    def as_dict(self) -> Json:
        return {
            "schema": REPORT_SCHEMA,
            "target": self.target,
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "verdict": self.verdict,
        }

    def as_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def as_text(self) -> str:
        width = max((len(c.name) for c in self.checks), default=0)
        lines = []
        for c in self.checks:
            line = f"{c.verdict.upper():5} {c.name.ljust(width)}  [{c.scope}]"
            if c.wall_time is not None:
                line += f"  {c.wall_time:.2f}s"
            lines.append(line)
            if not c.passed:
                for extra in (c.detail, c.residual):
                    if extra:
                        lines.extend(f"      {text}" for text in extra.splitlines())
        lines.append(f"{self.target}: {self.verdict}")
        return "\n".join(lines)


def save_report(path: str, report: Report) -> None:
    try:
        with open(path, "w") as f:
            f.write(report.as_json())
            f.write("\n")
    except OSError as err:
        raise ConfigurationError(f"cannot write the report to {path}: {err.strerror}")
    log.debug("wrote the %s report to %s", report.target, path)


def report_from_dict(obj: Json) -> Report:
    return Report(obj["target"], obj["config"], tuple(
        CheckResult(c["name"], c["scope"], c["verdict"], c.get("residual"), c.get("detail"), c.get("wall_time"))
        for c in obj["checks"]
    ))
