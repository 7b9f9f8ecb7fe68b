"""Monte Carlo estimation of the received-signal normalized variance.

The stability metric is V_j(tau_n) = Var S_j(tau_n) / |E S_j(tau_n)|^2,
estimated over an ensemble of channel draws at the symbol instants. The
predicted scaling is M C / (B N_eff) for broadband frequency-selective
channels and M / N_eff for narrowband ones; `scaling_regression` fits the
measured values against the prediction across a family of configs.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .channel import ChannelConfig, build_frequency_grid, sample_realization
from .moments import neff
from .timereversal import SymbolStream, synthesize

__all__ = [
    "VarianceEstimate",
    "StabilityPrediction",
    "RegressionResult",
    "mc_normalized_variance",
    "predicted_normalized_variance",
    "scaling_regression",
]

# Reliability guard: a normalized variance is only a meaningful ratio when
# the mean estimate is resolved well above its own standard error.
MEAN_RESOLUTION_FACTOR = 5.0


@dataclass(frozen=True, eq=False)
class VarianceEstimate:
    """Per (symbol instant, receiver) ensemble statistics.

    ``nvar`` holds var_hat / |mean_hat|^2, with NaN where the mean estimate
    is unresolved (``unreliable`` True there). Standard errors come from
    batch means over contiguous trial blocks.
    """

    fingerprint: str
    times: np.ndarray  # (T,)
    trials: int
    mean_hat: np.ndarray  # (T, M) complex
    mean_se: np.ndarray  # (T, M)
    var_hat: np.ndarray  # (T, M)
    var_se: np.ndarray  # (T, M)
    nvar: np.ndarray  # (T, M)
    nvar_se: np.ndarray  # (T, M)
    unreliable: np.ndarray  # (T, M) bool

    def summary(self) -> float:
        """Scalar stability figure: mean over receivers at the middle instant."""
        mid = len(self.times) // 2
        row = self.nvar[mid]
        good = ~self.unreliable[mid]
        if not np.any(good):
            raise ValueError("mean estimate unresolved at the middle instant")
        return float(np.mean(row[good]))

    def to_csv(self, fileobj) -> None:
        fileobj.write(f"# config {self.fingerprint}\n")
        fileobj.write(
            "config_id,receiver,symbol_index,mean_re,mean_im,var,nvar,nvar_se,trials\n"
        )
        n_t, n_rx = self.mean_hat.shape
        for l in range(n_t):
            for j in range(n_rx):
                fileobj.write(
                    f"{self.fingerprint},{j},{l},"
                    f"{float(self.mean_hat[l, j].real)!r},"
                    f"{float(self.mean_hat[l, j].imag)!r},"
                    f"{float(self.var_hat[l, j])!r},{float(self.nvar[l, j])!r},"
                    f"{float(self.nvar_se[l, j])!r},{self.trials}\n"
                )


@dataclass(frozen=True)
class StabilityPrediction:
    """Predicted normalized variance and the inputs it was formed from."""

    regime: str
    nvar: float
    n_eff: float
    n_rx: int
    symbol_rate: float
    bandwidth: float


def _trial_block(args) -> np.ndarray:
    """Worker: signals at the query times for a contiguous trial range."""
    cfg, lo, hi, symbols, symbol_times, magnitude, times = args
    grid = build_frequency_grid(cfg)
    stream = SymbolStream(symbols, symbol_times, cfg.fingerprint(), magnitude)
    out = np.empty((hi - lo, len(times), cfg.n_rx), dtype=complex)
    for i, trial in enumerate(range(lo, hi)):
        real = sample_realization(cfg, trial, grid)
        out[i] = synthesize(real, stream, times).values
    return out


def _gather_signals(cfg, trials, stream, times, workers, sampler) -> np.ndarray:
    """(trials, T, M) signal array, assembled in trial order.

    All statistics are reductions over this array, so the result is
    independent of how the trial ranges were distributed over workers.
    """
    if sampler is not None or workers <= 1:
        grid = build_frequency_grid(cfg)
        draw = sampler if sampler is not None else sample_realization
        out = np.empty((trials, len(times), cfg.n_rx), dtype=complex)
        for trial in range(trials):
            real = draw(cfg, trial, grid)
            out[trial] = synthesize(real, stream, times).values
        return out
    edges = np.linspace(0, trials, workers + 1).astype(int)
    jobs = [
        (cfg, int(lo), int(hi), stream.symbols, stream.times, stream.magnitude, times)
        for lo, hi in zip(edges[:-1], edges[1:])
        if hi > lo
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        blocks = list(pool.map(_trial_block, jobs))
    return np.concatenate(blocks, axis=0)


def mc_normalized_variance(
    cfg: ChannelConfig,
    trials: int,
    *,
    workers: int = 1,
    stream: SymbolStream | None = None,
    times=None,
    sampler=None,
) -> VarianceEstimate:
    """Ensemble mean/variance/normalized-variance at the symbol instants.

    ``sampler`` swaps in an alternative realization factory with the
    signature of `sample_realization` (used for synthetic-channel checks;
    runs inline). Deterministic given (cfg.seed, trials), regardless of
    ``workers``.
    """
    if trials < 100:
        raise ValueError(
            "at least 100 trials are needed for meaningful standard errors"
        )
    w_min = max(4, math.ceil(cfg.dsb))
    if cfg.n_symbols < w_min:
        raise ValueError(
            f"n_symbols={cfg.n_symbols} too small to saturate inter-symbol "
            f"interference; need >= {w_min}"
        )
    if stream is None:
        stream = SymbolStream.equal_phase(cfg)
    if times is None:
        times = stream.times
    times = np.asarray(times, dtype=float)

    signals = _gather_signals(cfg, trials, stream, times, workers, sampler)

    mean_hat = signals.mean(axis=0)
    var_hat = signals.var(axis=0, ddof=1)
    n_batches = min(20, trials // 20)
    batches = np.array_split(signals, n_batches, axis=0)
    b_mean = np.stack([b.mean(axis=0) for b in batches])
    b_var = np.stack([b.var(axis=0, ddof=1) for b in batches])
    with np.errstate(divide="ignore", invalid="ignore"):
        b_nvar = b_var / np.abs(b_mean) ** 2
    root = math.sqrt(n_batches)
    mean_se = np.sqrt(np.var(b_mean, axis=0, ddof=1)) / root
    var_se = np.std(b_var, axis=0, ddof=1) / root
    nvar_se = np.std(b_nvar, axis=0, ddof=1) / root

    unreliable = np.abs(mean_hat) < MEAN_RESOLUTION_FACTOR * mean_se
    with np.errstate(divide="ignore", invalid="ignore"):
        nvar = var_hat / np.abs(mean_hat) ** 2
    nvar = np.where(unreliable, np.nan, nvar)
    return VarianceEstimate(
        fingerprint=cfg.fingerprint(),
        times=times,
        trials=trials,
        mean_hat=mean_hat,
        mean_se=mean_se,
        var_hat=var_hat,
        var_se=var_se,
        nvar=nvar,
        nvar_se=nvar_se,
        unreliable=unreliable,
    )


def predicted_normalized_variance(cfg: ChannelConfig) -> StabilityPrediction:
    """Stability prediction M C / (B N_eff) (BBFS) or M / N_eff (NBFN)."""
    n_eff, _ = neff(cfg.n_tx, cfg.pinholes)
    if cfg.regime == "BBFS":
        value = cfg.n_rx * cfg.symbol_rate / (cfg.bandwidth * n_eff)
    else:
        value = cfg.n_rx / n_eff
    return StabilityPrediction(
        regime=cfg.regime,
        nvar=value,
        n_eff=n_eff,
        n_rx=cfg.n_rx,
        symbol_rate=cfg.symbol_rate,
        bandwidth=cfg.bandwidth,
    )


@dataclass(frozen=True)
class RegressionResult:
    """OLS fit of log10(measured) on log10(predicted) normalized variance."""

    slope: float
    intercept: float
    r_squared: float
    slope_stderr: float
    slope_ci: tuple[float, float]
    decades: float
    points: tuple[tuple[str, float, float], ...]  # (config id, predicted, measured)


def scaling_regression(
    configs, trials: int, *, workers: int = 1
) -> RegressionResult:
    """Fit measured vs predicted stability across a family of configs.

    Requires at least 5 configs whose predictions span at least 1.5 decades;
    the confidence interval is a 95% t-interval on the slope.
    """
    configs = list(configs)
    if len(configs) < 5:
        raise ValueError("need at least 5 configs for a scaling regression")
    predicted = np.array(
        [predicted_normalized_variance(c).nvar for c in configs]
    )
    decades = float(np.log10(predicted.max() / predicted.min()))
    if decades < 1.5:
        raise ValueError(
            f"insufficient spread in predicted normalized variance: "
            f"{decades:.2f} decades < 1.5"
        )
    measured = np.array(
        [
            mc_normalized_variance(c, trials, workers=workers).summary()
            for c in configs
        ]
    )
    fit = stats.linregress(np.log10(predicted), np.log10(measured))
    half = stats.t.ppf(0.975, len(configs) - 2) * fit.stderr
    points = tuple(
        (c.fingerprint(), float(p), float(m))
        for c, p, m in zip(configs, predicted, measured)
    )
    return RegressionResult(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue**2),
        slope_stderr=float(fit.stderr),
        slope_ci=(float(fit.slope - half), float(fit.slope + half)),
        decades=decades,
        points=points,
    )
