"""Exact second moments of the matched-filter matrix statistic.

For S_a = (H H* m)_a with H = H_n ... H_1 a product of independent complex
Gaussian stage matrices, the entries of each stage appear in E|S_a|^2 twice
unconjugated and twice conjugated. Wick's rule therefore leaves exactly two
admissible pairings per stage ("arc": pair within the same H H* factor,
"ladder": pair across the two conjugate factors), giving 2^n pairing
combinations in total. Each combination forces index identifications whose
satisfying-assignment count is a monomial in the stage dimensions, computed
here by a union-find over the index variables. The symbol vector enters only
through |m_a|^2 (when the receiver chains stay tied to the target entry) or
sum_i |m_i|^2 (when they are freed by a ladder at the last stage).

This enumeration is the package's moment ground truth; the closed forms
(`second_moment_flat`, `single_layer_closed`, `multilayer_leading`) are
independent expressions validated against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig

__all__ = [
    "CapacityError",
    "MomentSpec",
    "GraphTerm",
    "MonomialSum",
    "GraphClassification",
    "MAX_STAGES",
    "second_moment_flat",
    "single_layer_closed",
    "multilayer_leading",
    "wick_exact",
    "wick_variance",
    "squared_mean",
    "classify_graphs",
    "neff",
]

# 2^n pairing combinations are enumerated explicitly; 12 stages is far past
# any physically interesting chain and still enumerates instantly.
MAX_STAGES = 12

M_FACTOR_PEAK = "peak"  # |m_a|^2
M_FACTOR_SUM = "sum"  # sum_i |m_i|^2


class CapacityError(Exception):
    """Stage count exceeds the pairing-enumeration bound."""


@dataclass(frozen=True)
class MomentSpec:
    """Dimensions, stage variances, and symbol contraction for one moment."""

    n_tx: int
    pinholes: tuple[int, ...]
    n_rx: int
    variances: tuple[float, ...]
    symbol_vector: tuple[complex, ...]
    receiver: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pinholes", tuple(int(k) for k in self.pinholes))
        object.__setattr__(
            self, "variances", tuple(float(s) for s in self.variances)
        )
        object.__setattr__(
            self, "symbol_vector", tuple(complex(v) for v in self.symbol_vector)
        )
        if self.n_tx < 1 or self.n_rx < 1 or any(k < 1 for k in self.pinholes):
            raise ValueError("all dimensions must be >= 1")
        if len(self.variances) != self.n_stages:
            raise ValueError(
                f"need {self.n_stages} stage variances, got {len(self.variances)}"
            )
        if any(s <= 0 for s in self.variances):
            raise ValueError("stage variances must be positive")
        if len(self.symbol_vector) != self.n_rx:
            raise ValueError("symbol vector length must equal n_rx")
        if not (0 <= self.receiver < self.n_rx):
            raise ValueError("receiver index out of range")

    @property
    def n_stages(self) -> int:
        return len(self.pinholes) + 1

    @property
    def inner_dims(self) -> tuple[int, ...]:
        """Summed index-space sizes (N, K_1..K_{n-1}); M enters via m only."""
        return (self.n_tx, *self.pinholes)

    @classmethod
    def from_config(cls, cfg: ChannelConfig, receiver: int = 0) -> "MomentSpec":
        symbols = (complex(cfg.symbol_mag),) * cfg.n_rx
        return cls(
            n_tx=cfg.n_tx,
            pinholes=cfg.pinholes,
            n_rx=cfg.n_rx,
            variances=cfg.variances,
            symbol_vector=symbols,
            receiver=receiver,
        )


@dataclass(frozen=True)
class GraphTerm:
    """One pairing combination: a monomial in the stage dimensions.

    Bit k-1 of ``pairing_mask`` set means stage k paired as a ladder.
    ``exponents[j]`` is the number of free index classes in level j (the
    space of size N for j = 0, K_j otherwise); ``degree`` is their sum,
    the total degree once N = K_j = s.
    """

    pairing_mask: int
    exponents: tuple[int, ...]
    m_factor: str
    degree: int

    @property
    def is_mean_square(self) -> bool:
        """The no-ladder graph, equal to |E S_a|^2."""
        return self.pairing_mask == 0

    def count(self, inner_dims: tuple[int, ...]) -> int:
        """Exact satisfying-assignment count at concrete dimensions."""
        total = 1
        for d, e in zip(inner_dims, self.exponents):
            total *= d**e
        return total


@dataclass(frozen=True)
class MonomialSum:
    """Full 2^n graph expansion of a second moment."""

    n_stages: int
    terms: tuple[GraphTerm, ...]

    def integer_counts(self, inner_dims: tuple[int, ...]) -> tuple[int, int]:
        """(peak, sum) assignment counts, exact integers."""
        peak = 0
        spread = 0
        for t in self.terms:
            c = t.count(inner_dims)
            if t.m_factor == M_FACTOR_PEAK:
                peak += c
            else:
                spread += c
        return peak, spread

    def evaluate(self, spec: MomentSpec) -> float:
        """Numeric value; integer counts scaled by the sigma and m factors."""
        peak, spread = self.integer_counts(spec.inner_dims)
        sigma_sq = 1.0
        for s in spec.variances:
            sigma_sq *= s * s
        m = np.asarray(spec.symbol_vector)
        peak_weight = float(abs(m[spec.receiver]) ** 2)
        spread_weight = float(np.sum(np.abs(m) ** 2))
        return sigma_sq * (peak * peak_weight + spread * spread_weight)


_T, _R, _TP, _RP = 0, 1, 2, 3  # index chains: t, r, t', r'


def _pairing_term(n_stages: int, mask: int) -> GraphTerm:
    """Union-find class counting for one pairing combination.

    Index variables live on levels 0..n (level 0 has dimension N, level k
    has K_k, level n has M). Four chains thread through the levels: t and r
    from H H* m, t' and r' from its conjugate. Level-0 pairs share the
    backpropagation index (t_0 = r_0, t'_0 = r'_0) and the level-n chain
    heads t_n = t'_n are pinned to the target receiver a.
    """
    n = n_stages
    parent = list(range(4 * (n + 1)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    def var(chain: int, level: int) -> int:
        return 4 * level + chain

    union(var(_T, 0), var(_R, 0))
    union(var(_TP, 0), var(_RP, 0))
    for k in range(1, n + 1):
        ladder = (mask >> (k - 1)) & 1
        pairs = ((_T, _TP), (_RP, _R)) if ladder else ((_T, _R), (_RP, _TP))
        for ca, cb in pairs:
            union(var(ca, k), var(cb, k))
            union(var(ca, k - 1), var(cb, k - 1))

    exponents = []
    for level in range(n):
        roots = {find(var(c, level)) for c in (_T, _R, _TP, _RP)}
        exponents.append(len(roots))

    pinned = {find(var(_T, n)), find(var(_TP, n))}
    r_root = find(var(_R, n))
    rp_root = find(var(_RP, n))
    if r_root in pinned and rp_root in pinned:
        m_factor = M_FACTOR_PEAK
    elif r_root == rp_root:
        m_factor = M_FACTOR_SUM
    else:  # cannot occur for this contraction pattern
        raise AssertionError("receiver chains left unpaired")
    return GraphTerm(
        pairing_mask=mask,
        exponents=tuple(exponents),
        m_factor=m_factor,
        degree=sum(exponents),
    )


def _expansion(n_stages: int) -> MonomialSum:
    if n_stages > MAX_STAGES:
        raise CapacityError(
            f"{n_stages} stages exceed the {MAX_STAGES}-stage enumeration bound"
        )
    terms = tuple(_pairing_term(n_stages, mask) for mask in range(1 << n_stages))
    return MonomialSum(n_stages=n_stages, terms=terms)


def wick_exact(spec: MomentSpec) -> tuple[float, MonomialSum]:
    """Exact E|(H H* m)_a|^2 and its full graph expansion."""
    expansion = _expansion(spec.n_stages)
    return expansion.evaluate(spec), expansion


def squared_mean(spec: MomentSpec) -> float:
    """|E (H H* m)_a|^2 = (N prod K_j prod sigma_k)^2 |m_a|^2.

    Independent of the pairing enumeration; the expansion's no-ladder graph
    must reproduce it exactly.
    """
    scale = float(spec.n_tx)
    for k in spec.pinholes:
        scale *= k
    for s in spec.variances:
        scale *= s
    return scale**2 * abs(spec.symbol_vector[spec.receiver]) ** 2


def wick_variance(spec: MomentSpec) -> float:
    """Exact centered variance: the expansion minus its no-ladder graph."""
    expansion = _expansion(spec.n_stages)
    centered = MonomialSum(
        n_stages=expansion.n_stages,
        terms=tuple(t for t in expansion.terms if not t.is_mean_square),
    )
    return centered.evaluate(spec)


def second_moment_flat(n_tx: int, n_rx: int, symbol_vector, receiver: int) -> float:
    """Flat-channel second moment N^2 |m_j|^2 + N sum_i |m_i|^2."""
    if n_tx < 1 or n_rx < 1:
        raise ValueError("dimensions must be >= 1")
    if not (0 <= receiver < n_rx):
        raise ValueError("receiver index out of range")
    m = np.asarray(symbol_vector, dtype=complex)
    if m.shape != (n_rx,):
        raise ValueError("symbol vector length must equal n_rx")
    return float(
        n_tx**2 * abs(m[receiver]) ** 2 + n_tx * np.sum(np.abs(m) ** 2)
    )


def single_layer_closed(
    n_tx: int, k: int, n_rx: int, sigma1: float, sigma2: float, mu: float
) -> float:
    """Single-screen variance K N (M N + M K + 1) sigma1^2 sigma2^2 mu^2."""
    if min(n_tx, k, n_rx) < 1:
        raise ValueError("dimensions must be >= 1")
    if sigma1 <= 0 or sigma2 <= 0:
        raise ValueError("stage variances must be positive")
    return (
        k * n_tx * (n_rx * n_tx + n_rx * k + 1) * sigma1**2 * sigma2**2 * mu**2
    )


def multilayer_leading(spec: MomentSpec) -> float:
    """Collected leading-order variance for a pinhole chain (n >= 2).

    N prod(sigma^2) prod(K) (prod(K) + N sum_i prod_{j != i} K_j) sum|m|^2,
    i.e. the n maximal-degree ladder-containing graphs collected into one
    expression.
    """
    if spec.n_stages < 2:
        raise ValueError("needs at least one pinhole layer")
    ks = spec.pinholes
    prod_k = 1
    for k in ks:
        prod_k *= k
    hat_sum = sum(prod_k // k for k in ks)
    sigma_sq = 1.0
    for s in spec.variances:
        sigma_sq *= s * s
    m = np.asarray(spec.symbol_vector)
    spread_weight = float(np.sum(np.abs(m) ** 2))
    return spec.n_tx * sigma_sq * prod_k * (prod_k + spec.n_tx * hat_sum) * spread_weight


@dataclass(frozen=True)
class GraphClassification:
    """Degree split of the 2^n graphs at N = K_j = s, M fixed."""

    n_stages: int
    leading: tuple[GraphTerm, ...]
    subleading: tuple[GraphTerm, ...]

    @property
    def leading_count(self) -> int:
        return len(self.leading)


def classify_graphs(n_stages: int) -> GraphClassification:
    """Split the expansion into maximal-degree graphs and the rest.

    With every summed dimension set to s, the no-ladder graph has degree 2n
    and the variance-leading graphs degree 2n - 1; each extra pairing-type
    change costs one more index constraint, so subleading graphs sit at
    degree <= 2n - 2.
    """
    expansion = _expansion(n_stages)
    cutoff = 2 * n_stages - 1
    leading = tuple(t for t in expansion.terms if t.degree >= cutoff)
    subleading = tuple(t for t in expansion.terms if t.degree < cutoff)
    return GraphClassification(
        n_stages=n_stages, leading=leading, subleading=subleading
    )


def neff(n_tx: int, pinholes) -> tuple[float, float | None]:
    """Effective element count (N_eff, N_p) after pinhole screening.

    N_p = (sum_j K_j^-1)^-1 and N_eff = (N^-1 + N_p^-1)^-1; without
    pinholes N_eff = N and N_p is None.
    """
    if n_tx < 1:
        raise ValueError("n_tx must be >= 1")
    ks = tuple(int(k) for k in pinholes)
    if any(k < 1 for k in ks):
        raise ValueError("pinhole layer sizes must be >= 1")
    if not ks:
        return float(n_tx), None
    inv_p = sum(1.0 / k for k in ks)
    n_p = 1.0 / inv_p
    n_eff = 1.0 / (1.0 / n_tx + inv_p)
    return n_eff, n_p
