"""Records of inequality checks, shared by the verification suites."""

from dataclasses import dataclass, field
import math


@dataclass
class Check:
    """One evaluated inequality ``lhs <= rhs`` (after orienting it).

    ``slack = rhs - lhs``; the check passes when ``slack >= -tolerance``.
    ``context`` holds the inputs that identify the instance (start state,
    times, ...).  ``informational`` checks are reported but do not affect the
    overall verdict.
    """

    name: str
    lhs: float
    rhs: float
    tolerance: float = 1e-10
    context: dict = field(default_factory=dict)
    informational: bool = False

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return bool(self.slack >= -self.tolerance) or (math.isinf(self.rhs) and self.rhs > 0)

    def to_dict(self):
        return {"name": self.name, "lhs": _num(self.lhs), "rhs": _num(self.rhs),
                "slack": _num(self.slack), "passed": self.passed,
                "informational": self.informational,
                "context": {k: _plain(v) for k, v in self.context.items()}}


def _num(x):
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _plain(v):
    if isinstance(v, (set, frozenset)):
        v = sorted(v)
    if isinstance(v, (list, tuple)):
        return [_plain(u) for u in v]
    if hasattr(v, "item"):
        return v.item()
    return v


@dataclass
class CheckReport:
    """Collection of checks with per-name summaries."""

    checks: list = field(default_factory=list)
    skipped: dict = field(default_factory=dict)

    def add(self, name, lhs, rhs, tolerance=1e-10, informational=False, **context):
        self.checks.append(Check(name, float(lhs), float(rhs), tolerance, context, informational))

    def skip(self, name, reason):
        self.skipped.setdefault(name, reason)

    def extend(self, other):
        self.checks.extend(other.checks)
        for k, v in other.skipped.items():
            self.skipped.setdefault(k, v)
        return self

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed and not c.informational]

    @property
    def passed(self):
        return not self.failures

    def summary(self):
        """Per check name: count, failures, minimum slack."""
        out = {}
        for c in self.checks:
            s = out.setdefault(c.name, {"count": 0, "failed": 0, "min_slack": math.inf,
                                        "informational": c.informational})
            s["count"] += 1
            s["failed"] += 0 if c.passed else 1
            s["min_slack"] = min(s["min_slack"], c.slack)
        return out

    def to_dict(self, full=False):
        d = {"passed": self.passed,
             "summary": {k: {**v, "min_slack": _num(v["min_slack"])} for k, v in self.summary().items()},
             "skipped": dict(self.skipped),
             "failures": [c.to_dict() for c in self.failures]}
        if full:
            d["checks"] = [c.to_dict() for c in self.checks]
        return d

    def table(self):
        """Fixed-column text summary."""
        lines = [f"{'check':<40} {'count':>7} {'failed':>7} {'min slack':>12}  status"]
        for name, s in self.summary().items():
            status = "PASS" if s["failed"] == 0 else ("INFO" if s["informational"] else "FAIL")
            lines.append(f"{name:<40} {s['count']:>7d} {s['failed']:>7d} {s['min_slack']:>12.3e}  {status}")
        for name, reason in self.skipped.items():
            lines.append(f"{name:<40} {'-':>7} {'-':>7} {'-':>12}  SKIP ({reason})")
        return "\n".join(lines)
