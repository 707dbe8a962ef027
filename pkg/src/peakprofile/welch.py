"""Welch's unequal-variance t-test and the repeated random-pick protocol.

The Student-t tail probability is evaluated through the regularized
incomplete beta function using a modified Lentz continued fraction, so the
module needs nothing beyond the standard library and numpy.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from peakprofile.errors import DomainError

DEFAULT_ALPHA = 0.05
DEFAULT_REPS = 50

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 100_000


@dataclass(frozen=True)
class SampleSummary:
    n: int
    mean: float
    s2: float  # sample variance, divide by n - 1

    def __post_init__(self) -> None:
        if self.n < 2:
            raise DomainError("a sample summary needs n >= 2")
        if self.s2 < 0:
            raise DomainError("variance must be non-negative")

    @classmethod
    def of(cls, sample: np.ndarray) -> SampleSummary:
        x = np.asarray(sample, dtype=np.float64)
        return cls(len(x), float(x.mean()), float(x.var(ddof=1)))


@dataclass(frozen=True)
class WelchOutcome:
    t: float
    dof: float
    p_two_sided: float
    reject: bool


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b) (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_reg(a: float, b: float, x: float, one_minus_x: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b).

    ``one_minus_x`` may be supplied when ``1 - x`` is known more accurately
    than the subtraction would give.
    """
    y = 1.0 - x if one_minus_x is None else one_minus_x
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log(y)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def student_t_p(t: float, dof: float) -> float:
    """Two-sided p-value P(|T| >= |t|) for Student's t with ``dof`` degrees of freedom."""
    if not math.isfinite(t):
        raise DomainError(f"t must be finite, got {t}")
    if not dof > 0:
        raise DomainError(f"degrees of freedom must be positive, got {dof}")
    if t == 0.0:
        return 1.0
    t2 = t * t
    denom = dof + t2
    p = betainc_reg(dof / 2.0, 0.5, dof / denom, t2 / denom)
    return min(1.0, max(0.0, p))


def welch_dof(a: SampleSummary, b: SampleSummary) -> float:
    va, vb = a.s2 / a.n, b.s2 / b.n
    return (va + vb) ** 2 / (va * va / (a.n - 1) + vb * vb / (b.n - 1))


def welch_t(a: SampleSummary, b: SampleSummary, alpha: float = DEFAULT_ALPHA) -> WelchOutcome:
    se2 = a.s2 / a.n + b.s2 / b.n
    if se2 <= 0:
        raise DomainError("both samples have zero variance; the t statistic is undefined")
    t = (a.mean - b.mean) / math.sqrt(se2)
    dof = welch_dof(a, b)
    p = student_t_p(t, dof)
    return WelchOutcome(t, dof, p, p < alpha)


@dataclass
class ResamplingReport:
    repetitions: int
    n_a: int
    n_b: int
    avg_mean_a: float
    avg_mean_b: float
    avg_var_a: float
    avg_var_b: float
    acceptance_rate: float
    seed: int
    alpha: float
    outcomes: list[WelchOutcome] = field(default_factory=list, repr=False)

    @property
    def accepted(self) -> int:
        return sum(not o.reject for o in self.outcomes)


def _substream(seed: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, rep])))


def _one_rep(obs_a, obs_b, n_a, n_b, alpha, seed, rep, replace):
    rng = _substream(seed, rep)
    if replace:
        xa = obs_a[rng.integers(0, len(obs_a), n_a)]
        xb = obs_b[rng.integers(0, len(obs_b), n_b)]
    else:
        xa = rng.choice(obs_a, n_a, replace=False)
        xb = rng.choice(obs_b, n_b, replace=False)
    sa, sb = SampleSummary.of(xa), SampleSummary.of(xb)
    if sa.s2 == 0 and sb.s2 == 0:
        # degenerate draw: equal constants cannot be told apart, distinct ones always can
        same = sa.mean == sb.mean
        outcome = WelchOutcome(0.0 if same else math.copysign(math.inf, sa.mean - sb.mean), float(n_a + n_b - 2), 1.0 if same else 0.0, not same)
    else:
        outcome = welch_t(sa, sb, alpha)
    return sa, sb, outcome


def resampling_protocol(
    obs_a: np.ndarray,
    obs_b: np.ndarray,
    n_a: int,
    n_b: int,
    reps: int = DEFAULT_REPS,
    alpha: float = DEFAULT_ALPHA,
    seed: int = 0,
    replace: bool = True,
    workers: int = 1,
) -> ResamplingReport:
    """Repeat Welch's test on random picks sized by household counts.

    Repetition ``i`` draws from its own generator seeded by ``(seed, i)``,
    so results do not depend on ``workers``.
    """
    if reps < 1:
        raise DomainError("repetitions must be >= 1")
    obs_a = np.asarray(obs_a, dtype=np.float64)
    obs_b = np.asarray(obs_b, dtype=np.float64)
    if obs_a.size == 0 or obs_b.size == 0:
        raise DomainError("observation pools must be nonempty")
    if not replace and (n_a > obs_a.size or n_b > obs_b.size):
        raise DomainError("sampling without replacement needs pools at least as large as the picks")

    def run(rep: int):
        return _one_rep(obs_a, obs_b, n_a, n_b, alpha, seed, rep, replace)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(reps)))
    else:
        results = [run(r) for r in range(reps)]

    outcomes = [o for _, _, o in results]
    accepted = sum(not o.reject for o in outcomes)
    return ResamplingReport(
        repetitions=reps,
        n_a=n_a,
        n_b=n_b,
        avg_mean_a=math.fsum(a.mean for a, _, _ in results) / reps,
        avg_mean_b=math.fsum(b.mean for _, b, _ in results) / reps,
        avg_var_a=math.fsum(a.s2 for a, _, _ in results) / reps,
        avg_var_b=math.fsum(b.s2 for _, b, _ in results) / reps,
        acceptance_rate=accepted / reps,
        seed=seed,
        alpha=alpha,
        outcomes=outcomes,
    )


RESAMPLING_HEADER = "pair,level,n_a,n_b,avg_mean_a,avg_mean_b,avg_var_a,avg_var_b,acceptance_rate,repetitions,seed"


def resampling_csv(rows: Sequence[tuple[str, str, ResamplingReport]]) -> str:
    buf = io.StringIO()
    buf.write(RESAMPLING_HEADER + "\n")
    for pair, level, r in rows:
        buf.write(
            f"{pair},{level},{r.n_a},{r.n_b},{r.avg_mean_a:.6f},{r.avg_mean_b:.6f},"
            f"{r.avg_var_a:.6f},{r.avg_var_b:.6f},{r.acceptance_rate:.4f},{r.repetitions},{r.seed}\n"
        )
    return buf.getvalue()
