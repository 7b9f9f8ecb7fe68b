"""SINR, information rate, optimal power, and rate-stability tradeoffs.

All quantities here are closed-form evaluations (no Monte Carlo): the SINR
is the harmonic combination of the interference-limited and noise-limited
ratios, the rate is (1/2) M C ln(1 + SINR) in nats per unit time, and the
sweep scans the aggregate symbol rate M C to expose the tradeoff between
rate and statistical stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig
from .moments import neff

__all__ = [
    "RatePoint",
    "RateSweep",
    "sinr_bbfs",
    "sinr_nbfn",
    "info_rate",
    "optimal_power",
    "rate_sweep",
]


def _require_positive(**values) -> None:
    bad = [name for name, v in values.items() if not v > 0]
    if bad:
        raise ValueError(f"inputs must be positive: {', '.join(bad)}")


@dataclass(frozen=True)
class RatePoint:
    """One operating point of the closed-form link budget."""

    n_rx: int
    symbol_rate: float
    bandwidth: float
    n_eff: float
    noise_power: float
    tx_power: float
    sir: float
    snr: float
    sinr: float
    rate: float  # nats per unit time

    @property
    def aggregate_rate(self) -> float:
        """Aggregate symbol rate M C."""
        return self.n_rx * self.symbol_rate


def sinr_bbfs(
    n_eff: float,
    n_rx: int,
    symbol_rate: float,
    bandwidth: float,
    noise_power: float,
    tx_power: float,
) -> float:
    """Broadband SINR: (M C / (N_eff B) + nu M C / P)^-1."""
    _require_positive(
        n_eff=n_eff,
        n_rx=n_rx,
        symbol_rate=symbol_rate,
        bandwidth=bandwidth,
        noise_power=noise_power,
        tx_power=tx_power,
    )
    mc = n_rx * symbol_rate
    return 1.0 / (mc / (n_eff * bandwidth) + noise_power * mc / tx_power)


def sinr_nbfn(
    n_eff: float,
    n_rx: int,
    symbol_rate: float,
    noise_power: float,
    tx_power: float,
) -> float:
    """Narrowband SINR: (M / N_eff + nu M C / P)^-1."""
    _require_positive(
        n_eff=n_eff,
        n_rx=n_rx,
        symbol_rate=symbol_rate,
        noise_power=noise_power,
        tx_power=tx_power,
    )
    mc = n_rx * symbol_rate
    return 1.0 / (n_rx / n_eff + noise_power * mc / tx_power)


def info_rate(n_rx: int, symbol_rate: float, sinr: float) -> float:
    """(1/2) M C ln(1 + SINR), nats per unit time."""
    if sinr < 0:
        raise ValueError("sinr must be >= 0")
    return 0.5 * n_rx * symbol_rate * math.log1p(sinr)


def optimal_power(bandwidth: float, noise_power: float, n_eff: float) -> float:
    """SINR-balancing power nu B N_eff (noise level times B N_eff)."""
    _require_positive(bandwidth=bandwidth, noise_power=noise_power, n_eff=n_eff)
    return noise_power * bandwidth * n_eff


@dataclass(frozen=True, eq=False)
class RateSweep:
    """Rate table over an (M C, P) grid with the optimum annotated."""

    points: tuple[RatePoint, ...]
    optimum: RatePoint
    power_per_nat: float
    predicted_nvar_at_optimum: float
    optimal_power: float  # nu B N_eff at the config's N_eff
    optimal_power_unsimplified: float  # nu max(B, C_opt) N_eff


def rate_sweep(
    cfg: ChannelConfig, mc_values, p_values=None, n_eff: float | None = None
) -> RateSweep:
    """Evaluate the rate formulas over a grid of aggregate symbol rates.

    ``mc_values`` must span at least 3 decades. M is fixed at cfg.n_rx and
    C = mc / M varies; for the broadband regime every quantity depends on
    M and C only through the product. ``p_values`` defaults to the config
    transmit power.
    """
    mc_values = np.asarray(list(mc_values), dtype=float)
    if mc_values.size == 0:
        raise ValueError("empty M C grid")
    if np.any(mc_values <= 0):
        raise ValueError("M C grid values must be positive")
    span = math.log10(mc_values.max() / mc_values.min())
    if span < 3.0 - 1e-9:
        raise ValueError(f"M C grid spans {span:.2f} decades, need >= 3")
    if p_values is None:
        p_values = [cfg.tx_power]
    p_values = np.asarray(list(p_values), dtype=float)
    if p_values.size == 0 or np.any(p_values <= 0):
        raise ValueError("power grid must be non-empty and positive")
    if n_eff is None:
        n_eff, _ = neff(cfg.n_tx, cfg.pinholes)

    m = cfg.n_rx
    b = cfg.bandwidth
    nu = cfg.noise_power
    broadband = cfg.regime == "BBFS"
    points = []
    for p in (float(v) for v in p_values):
        for mc in mc_values.tolist():
            c = mc / m
            if broadband:
                sinr = sinr_bbfs(n_eff, m, c, b, nu, p)
                sir = n_eff * b / mc
            else:
                sinr = sinr_nbfn(n_eff, m, c, nu, p)
                sir = n_eff / m
            snr = p / (nu * mc)
            points.append(
                RatePoint(
                    n_rx=m,
                    symbol_rate=c,
                    bandwidth=b,
                    n_eff=n_eff,
                    noise_power=nu,
                    tx_power=p,
                    sir=sir,
                    snr=snr,
                    sinr=sinr,
                    rate=info_rate(m, c, sinr),
                )
            )
    optimum = max(points, key=lambda pt: pt.rate)
    if broadband:
        nvar_opt = optimum.aggregate_rate / (b * n_eff)
    else:
        nvar_opt = m / n_eff
    return RateSweep(
        points=tuple(points),
        optimum=optimum,
        power_per_nat=optimum.tx_power / optimum.rate,
        predicted_nvar_at_optimum=nvar_opt,
        optimal_power=optimal_power(b, nu, n_eff),
        optimal_power_unsimplified=nu * max(b, optimum.symbol_rate) * n_eff,
    )
