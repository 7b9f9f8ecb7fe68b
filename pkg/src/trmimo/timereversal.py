"""Time-reversal retransmission: received signal synthesis and its mean.

The array prefilters each receiver's symbol stream with the conjugated
channel, so the signal arriving at receiver j is

    S_j(t) = sum_l sum_f w_f g(w_f) e^{-i w_f (t - tau_l)} (H_b H_b* m(tau_l))_j,

a quadrature over the pulse band of the per-bin matched-filter response.
``mean_signal`` evaluates the ensemble mean in closed form: a Gaussian
pulse train with exact constants implied by the chosen pulse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    DOMAIN_SYMBOLS,
    ChannelConfig,
    ChannelRealization,
    _rng_stream,
)

__all__ = [
    "SymbolStream",
    "SignalTrace",
    "pulse_amplitude",
    "pulse_area",
    "synthesize",
    "mean_signal",
]

# integral of g over frequency is PULSE_AREA_CONSTANT * B for the unit-energy
# Gaussian pulse g(w) = (2 pi)^(-1/4) exp(-(w - w0)^2 / (4 B^2)).
PULSE_AREA_CONSTANT = 2.0 * math.sqrt(math.pi) * (2.0 * math.pi) ** (-0.25)


def pulse_amplitude(omega, cfg) -> np.ndarray:
    """Pulse amplitude g(omega); peak (2 pi)^(-1/4) at the carrier.

    ``cfg`` only needs ``carrier`` and ``bandwidth`` attributes, so a
    FrequencyGrid works as well as a ChannelConfig.
    """
    u = (np.asarray(omega, dtype=float) - cfg.carrier) / (2.0 * cfg.bandwidth)
    return (2.0 * math.pi) ** (-0.25) * np.exp(-u * u)


def pulse_area(cfg) -> float:
    """Analytic integral of g(omega) d omega."""
    return PULSE_AREA_CONSTANT * cfg.bandwidth


@dataclass(frozen=True, eq=False)
class SymbolStream:
    """W x M symbol block m_i(tau_l) on the regular symbol clock tau_l = l tau.

    ``magnitude`` is the common symbol magnitude when the stream was built by
    a factory (the experiment contract |m| = mu); pass None for synthetic
    streams with mixed magnitudes (e.g. linearity checks).
    """

    symbols: np.ndarray  # (W, M) complex
    times: np.ndarray  # (W,)
    fingerprint: str
    magnitude: float | None = None

    def __post_init__(self):
        symbols = np.atleast_2d(np.asarray(self.symbols, dtype=complex))
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "times", times)
        if symbols.shape[0] != times.shape[0] or symbols.shape[0] < 1:
            raise ValueError("need one symbol row per symbol instant, W >= 1")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("symbol times must be strictly increasing")
        if self.magnitude is not None and not np.allclose(
            np.abs(symbols), self.magnitude, rtol=1e-9, atol=0.0
        ):
            raise ValueError("symbol magnitudes must all equal the stated magnitude")

    @property
    def width(self) -> int:
        return self.symbols.shape[0]

    @classmethod
    def equal_phase(cls, cfg: ChannelConfig) -> "SymbolStream":
        """All symbols equal to mu (the default experiment stream)."""
        w, m = cfg.n_symbols, cfg.n_rx
        symbols = np.full((w, m), cfg.symbol_mag, dtype=complex)
        times = np.arange(w) * cfg.symbol_interval
        return cls(symbols, times, cfg.fingerprint(), cfg.symbol_mag)

    @classmethod
    def random_phase(cls, cfg: ChannelConfig) -> "SymbolStream":
        """Uniform random phases of magnitude mu, fixed across trials."""
        w, m = cfg.n_symbols, cfg.n_rx
        rng = _rng_stream(cfg.seed, DOMAIN_SYMBOLS, 0, 0)
        theta = rng.uniform(0.0, 2.0 * math.pi, size=(w, m))
        symbols = cfg.symbol_mag * np.exp(1j * theta)
        times = np.arange(w) * cfg.symbol_interval
        return cls(symbols, times, cfg.fingerprint(), cfg.symbol_mag)


@dataclass(frozen=True, eq=False)
class SignalTrace:
    """Complex received signal per receiver over query times."""

    times: np.ndarray  # (T,)
    values: np.ndarray  # (T, M) complex
    fingerprint: str

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.atleast_2d(np.asarray(self.values, dtype=complex))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if values.shape[0] != times.shape[0]:
            raise ValueError("need one value vector per query time")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("query times must be strictly increasing")

    def to_csv(self, fileobj) -> None:
        """Long-format CSV: time, receiver, re, im."""
        fileobj.write(f"# config {self.fingerprint}\n")
        fileobj.write("time,receiver,re,im\n")
        for t, row in zip(self.times, self.values):
            for j, v in enumerate(row):
                fileobj.write(
                    f"{float(t)!r},{j},{float(v.real)!r},{float(v.imag)!r}\n"
                )


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("query times must be a non-empty 1-d sequence")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValueError("query times must be strictly increasing")
    return times


def synthesize(
    real: ChannelRealization, stream: SymbolStream, times
) -> SignalTrace:
    """Received signal at the query times for one channel realization.

    Linear in the symbol stream and deterministic given the realization.
    """
    if real.fingerprint != stream.fingerprint:
        raise ValueError(
            "channel realization and symbol stream come from different configs "
            f"({real.fingerprint} vs {stream.fingerprint})"
        )
    times = _check_times(times)
    grid = real.grid
    g = pulse_amplitude(grid.omegas, grid)
    hb = real.composed  # (nb, M, N) -- here used as the per-bin M x N transfer
    gram = hb @ hb.conj().swapaxes(1, 2)  # (nb, M, M)
    # u[b, l, :] = (H_b H_b* m(tau_l)), the per-bin matched-filter response
    u = np.einsum("bij,lj->bli", gram, stream.symbols)
    uf = u[grid.bins]  # (F, W, M)
    retro = np.exp(1j * np.outer(grid.omegas, stream.times))  # e^{+i w tau_l}
    amplitudes = (grid.weights * g)[:, None] * np.einsum("fl,flj->fj", retro, uf)
    carrier_phase = np.exp(-1j * np.outer(times, grid.omegas))  # (T, F)
    values = carrier_phase @ amplitudes
    return SignalTrace(times=times, values=values, fingerprint=real.fingerprint)


def mean_signal(cfg: ChannelConfig, stream: SymbolStream, times) -> SignalTrace:
    """Closed-form ensemble mean of the received signal.

    E S_j(t) = c_g B N (prod K_j) (prod sigma_k)
               * sum_l m_j(tau_l) e^{-i w0 (t - tau_l)} e^{-B^2 (t - tau_l)^2}

    with c_g = 2 sqrt(pi) (2 pi)^(-1/4) from the exact Gaussian integral of
    the pulse amplitude.
    """
    times = _check_times(times)
    prefactor = pulse_area(cfg) * cfg.n_tx
    for k in cfg.pinholes:
        prefactor *= k
    for s in cfg.variances:
        prefactor *= s
    lag = times[:, None] - stream.times[None, :]  # (T, W)
    envelope = np.exp(-1j * cfg.carrier * lag - (cfg.bandwidth * lag) ** 2)
    values = prefactor * np.einsum("tl,lj->tj", envelope, stream.symbols)
    return SignalTrace(times=times, values=values, fingerprint=stream.fingerprint)
