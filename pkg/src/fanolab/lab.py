"""Verification lab: exhaustive small-instance oracles and seeded Monte
Carlo estimator simulations.

Everything here exists to audit the bounds one-sidedly: a lower bound on
the minimax risk must sit below the empirical risk of every concrete
estimator we run (up to Monte Carlo confidence). The minimax infimum
itself is not computable, so passing this audit certifies soundness, not
sharpness.

Reproducibility contract: replicate r of an experiment draws from the
Philox stream keyed by (seed, r), chunks accumulate with a fixed-order
pairwise reduction, and identical configs (including chunking) produce
bit-identical reports.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .discrete import DiscreteSpace
from .info import DomainError, EnumerationLimitError, MarkovChainSpec, ProbVector
from .results import MinimaxBound
from .stats import clopper_pearson, mean_ci, pairwise_sum
from .streams import CHAIN_STREAM, SPACE_STREAM, stream

__all__ = [
    "PROBLEMS",
    "ESTIMATORS",
    "ExperimentConfig",
    "TailEstimate",
    "MatchedBound",
    "RiskReport",
    "BoundAudit",
    "random_chain",
    "random_symmetric_space",
    "enumerate_decoders_min_tail",
    "hard_threshold",
    "soft_threshold",
    "simulate_risk",
    "check_bounds",
    "bound_to_matched",
    "DECODER_ENUM_CUTOFF",
]

PROBLEMS = ("sparse-location", "normal-mean", "regression", "discrete-chain")
ESTIMATORS = ("mean", "hard-threshold", "soft-threshold", "ols", "chain-decoder")
DECODER_ENUM_CUTOFF = 10**6

_CONFIDENCE = 0.99


def random_chain(seed: int, sizes: tuple[int, int, int], *, stream_id: int = 0,
                 uniform_prior: bool = False) -> MarkovChainSpec:
    """Random chain with symmetric-Dirichlet(1) rows; deterministic in (seed, stream_id)."""
    nv, nx, nvhat = sizes
    g = stream(seed, CHAIN_STREAM + stream_id)
    prior = ProbVector(np.full(nv, 1.0 / nv)) if uniform_prior \
        else ProbVector(g.dirichlet(np.ones(nv)))
    channel = g.dirichlet(np.ones(nx), size=nv)
    decoder = g.dirichlet(np.ones(nvhat), size=nx)
    return MarkovChainSpec(prior=prior, channel=channel, decoder=decoder)


def random_symmetric_space(seed: int, k: int, *, stream_id: int = 0,
                           high: float = 2.0) -> DiscreteSpace:
    """Random symmetric distances U[0, high] off the diagonal, zeros on it."""
    g = stream(seed, SPACE_STREAM + stream_id)
    m = np.zeros((k, k))
    iu = np.triu_indices(k, 1)
    m[iu] = g.random(len(iu[0])) * high
    m += m.T
    return DiscreteSpace.from_matrix(m)


def enumerate_decoders_min_tail(prior: ProbVector, channel, space: DiscreteSpace,
                                t: float) -> float:
    """Exact min over all deterministic decoders g: X -> V of P(rho(g(X), V) > t).

    Brute-force enumeration over all |V|^|X| decoder functions; this is
    the oracle the Fano tail bounds are audited against, so no shortcut
    replaces the loop. Guarded by DECODER_ENUM_CUTOFF.
    """
    c = np.asarray(channel, dtype=np.float64)
    nv, nx = c.shape
    if nv != len(prior) or nv != space.n_points:
        raise DomainError("prior, channel and space must agree on |V|")
    n_decoders = space.n_points**nx
    if n_decoders > DECODER_ENUM_CUTOFF:
        raise EnumerationLimitError(
            f"{n_decoders} decoders exceed the enumeration cutoff {DECODER_ENUM_CUTOFF}")
    dmat = space.distance_matrix()
    weight = prior.p[:, None] * c           # (v, x)
    miss = (dmat.T > t).astype(np.float64)  # miss[vhat, v] = 1{rho(vhat, v) > t}
    cost = (miss @ weight).T                # cost[x, vhat] = P(X=x, rho(vhat, V) > t)
    xs = np.arange(nx)
    best = math.inf
    for g in itertools.product(range(space.n_points), repeat=nx):
        val = float(cost[xs, g].sum())
        if val < best:
            best = val
    return best


def hard_threshold(x: np.ndarray, tau: float) -> np.ndarray:
    """Keep coordinates with |x_j| > tau, zero the rest."""
    return np.where(np.abs(x) > tau, x, 0.0)


def soft_threshold(x: np.ndarray, tau: float) -> np.ndarray:
    """Shrink coordinates toward zero by tau."""
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Seeded estimator-vs-bound experiment description.

    The latent parameter is drawn uniformly per replicate: on the
    eps-scaled sparse sign set (sparse-location), on the l2-ball of the
    given radius (normal-mean, regression), or from the chain prior
    (discrete-chain). t_list are tail radii measured on the parameter
    error, except for discrete-chain where they act on the index distance.
    """

    problem: str
    estimator: str
    reps: int
    seed: int
    d: int = 1
    s: int = 0
    n: int = 1
    sigma2: float = 1.0
    eps: float = 0.0
    radius: float = 1.0
    t_list: tuple[float, ...] = ()
    design: np.ndarray | None = None
    chain: MarkovChainSpec | None = None
    space: DiscreteSpace | None = None
    chunk_size: int = 1024

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise DomainError(f"unknown problem {self.problem!r}; expected one of {PROBLEMS}")
        if self.estimator not in ESTIMATORS:
            raise DomainError(f"unknown estimator {self.estimator!r}; expected one of {ESTIMATORS}")
        if self.reps < 1 or self.chunk_size < 1:
            raise DomainError("reps and chunk_size must be >= 1")
        if self.problem in ("sparse-location", "normal-mean"):
            if self.d < 1 or self.n < 1 or not self.sigma2 > 0:
                raise DomainError("need d >= 1, n >= 1, sigma2 > 0")
            if self.estimator not in ("mean", "hard-threshold", "soft-threshold"):
                raise DomainError(f"estimator {self.estimator!r} does not fit {self.problem!r}")
        if self.problem == "sparse-location" and not 1 <= self.s <= self.d:
            raise DomainError("sparse-location needs 1 <= s <= d")
        if self.problem == "regression":
            if self.design is None:
                raise DomainError("regression needs a design matrix")
            if self.estimator != "ols":
                raise DomainError("regression supports the 'ols' estimator")
            X = np.asarray(self.design, dtype=np.float64)
            if X.ndim != 2 or np.linalg.matrix_rank(X) < X.shape[1]:
                raise DomainError("design must be a full-column-rank matrix")
            object.__setattr__(self, "design", X)
        if self.problem == "discrete-chain":
            if self.chain is None or self.space is None:
                raise DomainError("discrete-chain needs both a chain and a space")
            if self.estimator != "chain-decoder":
                raise DomainError("discrete-chain supports the 'chain-decoder' estimator")
            if self.chain.n_v != self.space.n_points or self.chain.n_vhat != self.space.n_points:
                raise DomainError("chain alphabets must match the space")


@dataclass(frozen=True)
class TailEstimate:
    t: float
    event: str              # "ge" for continuum-style tails, "gt" for discrete
    count: int
    reps: int
    p_hat: float
    ci: tuple[float, float]


@dataclass(frozen=True)
class MatchedBound:
    """A lower bound matched to an empirical quantity: the mean risk
    (target='risk') or the tail at radius t (target='tail')."""

    label: str
    target: str
    value: float
    t: float | None = None

    def __post_init__(self):
        if self.target not in ("risk", "tail"):
            raise DomainError("target must be 'risk' or 'tail'")
        if self.target == "tail" and self.t is None:
            raise DomainError("tail-matched bounds need t")


@dataclass(frozen=True)
class RiskReport:
    problem: str
    estimator: str
    reps: int
    seed: int
    risk_mean: float
    risk_ci: tuple[float, float]
    tails: tuple[TailEstimate, ...]
    bounds: tuple[MatchedBound, ...] = ()
    violations: tuple[str, ...] = ()

    def to_text(self) -> str:
        """Canonical text form; byte-identical for identical configs."""
        lines = [
            f"problem={self.problem} estimator={self.estimator} reps={self.reps} seed={self.seed}",
            f"risk_mean={self.risk_mean!r} ci=({self.risk_ci[0]!r},{self.risk_ci[1]!r})",
        ]
        for te in self.tails:
            lines.append(f"tail t={te.t!r} event={te.event} count={te.count} "
                         f"p_hat={te.p_hat!r} ci=({te.ci[0]!r},{te.ci[1]!r})")
        for mb in self.bounds:
            lines.append(f"bound label={mb.label} target={mb.target} t={mb.t!r} "
                         f"value={mb.value!r}")
        lines.append("violations=" + (",".join(self.violations) if self.violations else "none"))
        return "\n".join(lines) + "\n"


def _uniform_ball(g: np.random.Generator, d: int, radius: float) -> np.ndarray:
    u = g.standard_normal(d)
    norm = math.sqrt(float(u @ u))
    if norm == 0.0:
        return np.zeros(d)
    return u * (radius * g.random() ** (1.0 / d) / norm)


def _replicate_gaussian(cfg: ExperimentConfig, g: np.random.Generator):
    d, n = cfg.d, cfg.n
    sigma = math.sqrt(cfg.sigma2)
    if cfg.problem == "sparse-location":
        v = np.zeros(d)
        support = g.choice(d, size=cfg.s, replace=False)
        v[support] = g.integers(0, 2, size=cfg.s) * 2 - 1
        theta = cfg.eps * v
    else:
        theta = _uniform_ball(g, d, cfg.radius)
    x = theta + sigma * g.standard_normal((n, d))
    xbar = x.mean(axis=0)
    if cfg.estimator == "mean":
        theta_hat = xbar
    else:
        tau = sigma * math.sqrt(2.0 * math.log(d) / n)
        fn = hard_threshold if cfg.estimator == "hard-threshold" else soft_threshold
        theta_hat = fn(xbar, tau)
    err = theta_hat - theta
    loss = float(err @ err)
    return loss, math.sqrt(loss)


def _make_replicate(cfg: ExperimentConfig):
    """Returns (per-replicate fn g -> (loss, error_distance), tail event kind)."""
    if cfg.problem in ("sparse-location", "normal-mean"):
        return lambda g: _replicate_gaussian(cfg, g), "ge"
    if cfg.problem == "regression":
        X = cfg.design
        n_rows, d = X.shape
        sigma = math.sqrt(cfg.sigma2)
        # (X^T X)^{-1} X^T, computed once; OLS is linear in y
        pinv = np.linalg.solve(X.T @ X, X.T)

        def rep(g):
            theta = _uniform_ball(g, d, cfg.radius)
            y = X @ theta + sigma * g.standard_normal(n_rows)
            err = pinv @ y - theta
            loss = float(err @ err)
            return loss, math.sqrt(loss)

        return rep, "ge"
    chain, space = cfg.chain, cfg.space
    dmat = space.distance_matrix()
    nv, nx, nvhat = chain.n_v, chain.n_x, chain.n_vhat

    def rep(g):
        v = int(g.choice(nv, p=chain.prior.p))
        x = int(g.choice(nx, p=chain.channel[v]))
        vhat = int(g.choice(nvhat, p=chain.decoder[x]))
        dist = float(dmat[vhat, v])
        return dist, dist

    return rep, "gt"


def simulate_risk(config: ExperimentConfig,
                  bounds: tuple[MatchedBound, ...] = ()) -> RiskReport:
    """Run the seeded experiment and report empirical risk and tails.

    Matched bounds, when supplied, are audited against the 99% CI upper
    endpoints and violations are recorded in the report.
    """
    rep_fn, event = _make_replicate(config)
    reps, chunk = config.reps, config.chunk_size
    t_arr = np.asarray(config.t_list, dtype=np.float64)
    losses = np.empty(reps)
    tail_counts_chunks: list[np.ndarray] = []
    chunk_sums: list[float] = []
    for lo in range(0, reps, chunk):
        hi = min(lo + chunk, reps)
        counts = np.zeros(t_arr.size, dtype=np.int64)
        for r in range(lo, hi):
            loss, dist = rep_fn(stream(config.seed, r))
            losses[r] = loss
            if t_arr.size:
                if event == "ge":
                    counts += dist >= t_arr
                else:
                    counts += dist > t_arr
        tail_counts_chunks.append(counts)
        chunk_sums.append(float(losses[lo:hi].sum()))
    # Mean via the fixed-order pairwise reduction; the CI half-width still
    # comes from the per-replicate sample variance.
    risk_mean = pairwise_sum(chunk_sums) / reps
    _, ci = mean_ci(losses, _CONFIDENCE)
    if reps >= 2:
        half = (ci[1] - ci[0]) / 2.0
        ci = (risk_mean - half, risk_mean + half)
    tail_counts = np.sum(tail_counts_chunks, axis=0) if t_arr.size else np.zeros(0, dtype=np.int64)
    tails = []
    for t, k in zip(t_arr.tolist(), tail_counts.tolist()):
        tails.append(TailEstimate(t=t, event=event, count=int(k), reps=reps,
                                  p_hat=k / reps,
                                  ci=clopper_pearson(int(k), reps, _CONFIDENCE)))
    report = RiskReport(problem=config.problem, estimator=config.estimator,
                        reps=reps, seed=config.seed, risk_mean=risk_mean,
                        risk_ci=ci, tails=tuple(tails), bounds=tuple(bounds))
    violations = tuple(label for label, margin in _margins(report) if margin < 0)
    return replace(report, violations=violations)


def _margins(report: RiskReport) -> list[tuple[str, float]]:
    out = []
    for mb in report.bounds:
        if mb.target == "risk":
            out.append((mb.label, report.risk_ci[1] - mb.value))
        else:
            match = [te for te in report.tails if te.t == mb.t]
            if not match:
                raise DomainError(f"bound {mb.label!r} matched to t={mb.t!r}, "
                                  "which is not in the report's t_list")
            out.append((mb.label, match[0].ci[1] - mb.value))
    return out


@dataclass(frozen=True)
class BoundAudit:
    passed: bool
    margins: tuple[tuple[str, float], ...]
    worst_label: str
    worst_margin: float


def check_bounds(report: RiskReport) -> BoundAudit:
    """Fail iff any matched lower bound exceeds the 99% CI upper endpoint.

    Margin = CI-upper - bound; negative means the bound claims more than
    the estimator achieved, which a sound lower bound can never do.
    """
    margins = _margins(report)
    if not margins:
        raise DomainError("report carries no matched bounds to audit")
    worst = min(margins, key=lambda lm: lm[1])
    return BoundAudit(passed=all(m >= 0 for _, m in margins),
                      margins=tuple(margins),
                      worst_label=worst[0], worst_margin=worst[1])


def bound_to_matched(bound: MinimaxBound, label: str | None = None) -> MatchedBound:
    """Match a pipeline risk bound to the empirical mean risk."""
    return MatchedBound(label=label or bound.pipeline, target="risk", value=bound.value)
