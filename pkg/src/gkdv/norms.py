"""Lebesgue, Sobolev and time-weighted trajectory norms.

The Sobolev bracket is 1 + |xi| throughout.  Trajectory norms replace the
continuum sup over (0, T] by a max over a finite sample-time grid (a lower
bound of the true norm); sample grids should include geometrically spaced
small times, which WeightedNormConfig.default provides.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError
from .spectral import (
    SpectralField,
    _require_coherent,
    fractional_derivative_shifted,
    spatial_derivative,
)


def lebesgue_norm(f: SpectralField, q: float) -> float:
    """Discrete L^q norm (rectangle rule); q = inf gives the max norm."""
    _require_coherent(f)
    if q == np.inf:
        return float(np.max(np.abs(f.phys)))
    if q < 1:
        raise ValueError(f"Lebesgue exponent must satisfy q >= 1, got {q}")
    return float((np.sum(np.abs(f.phys) ** q) * f.grid.h) ** (1.0 / q))


def spectral_lq_norm(f: SpectralField, q: float) -> float:
    """L^q norm of the continuum-scale transform, measure dxi/(2*pi).

    The coefficient of mode k at continuum scale is length * spec[k]; the
    measure dxi/(2*pi) = 1/length per mode makes this norm match the physical
    L^2 norm exactly at q = 2 (Parseval).
    """
    _require_coherent(f)
    coeffs = f.grid.length * np.abs(f.spec)
    if q == np.inf:
        return float(np.max(coeffs))
    if q < 1:
        raise ValueError(f"Lebesgue exponent must satisfy q >= 1, got {q}")
    return float((np.sum(coeffs ** q) / f.grid.length) ** (1.0 / q))


def sobolev_norm(f: SpectralField, s: float) -> float:
    """H^s norm: L^2 norm of (1+|xi|)^s-weighted coefficients."""
    _require_coherent(f)
    w = (1.0 + np.abs(f.grid.xi)) ** s
    return float(np.sqrt(f.grid.length * np.sum((w * np.abs(f.spec)) ** 2)))


def gamma_k(k: float) -> float:
    """Time-weight exponent numerator (3k+2)/(2(k+1)); lies in (1, 3/2) for k > 0."""
    if k <= 0:
        raise ValueError(f"nonlinearity degree must be positive, got {k}")
    return (3.0 * k + 2.0) / (2.0 * (k + 1.0))


def omega_k(k: float, p: float) -> float:
    """Contraction exponent (2p - 3k - 2)/(2p); positive iff p > (3/2)k + 1.

    Negative values are returned as-is and gated by callers.
    """
    return (2.0 * p - 3.0 * k - 2.0) / (2.0 * p)


@dataclass(frozen=True)
class WeightedNormConfig:
    """Parameters of the time-weighted spaces on (0, t_final]."""

    s: float
    k: float
    p: float
    t_final: float
    sample_times: tuple

    def __post_init__(self):
        if self.k <= 0 or self.p <= 0:
            raise ValueError("k and p must be positive")
        if not 0 < self.t_final <= 1:
            raise ValueError(f"t_final must lie in (0, 1], got {self.t_final}")
        ts = np.asarray(self.sample_times, dtype=float)
        if ts.size == 0 or np.any(ts <= 0) or np.any(np.diff(ts) < 0):
            raise ValueError("sample_times must be nonempty, positive and sorted")
        if ts[-1] > self.t_final * (1 + 1e-12):
            raise ValueError("sample_times must not exceed t_final")

    @property
    def weight_exponent(self) -> float:
        return gamma_k(self.k) / self.p

    @classmethod
    def default(cls, s, k, p, t_final, n_times: int = 20, span: float = 1e-4):
        times = tuple(np.geomspace(span * t_final, t_final, n_times))
        return cls(s=s, k=k, p=p, t_final=t_final, sample_times=times)


@dataclass
class NormReport:
    """Per-time norm components and their discrete sup."""

    space: str
    h_s: float
    components: list = field(default_factory=list)  # (time, name, value) rows
    total: float = 0.0

    def to_csv_rows(self) -> list[str]:
        rows = ["time,component,value"]
        for t, name, value in self.components:
            rows.append(f"{t:.17g},{name},{value:.17g}")
        return rows

    def to_json_dict(self) -> dict:
        return {
            "space": self.space,
            "h_s": self.h_s,
            "total": self.total,
            "components": [
                {"time": t, "component": name, "value": value}
                for t, name, value in self.components
            ],
        }


def _weighted_report(trajectory, cfg: WeightedNormConfig, weighted_parts, space: str) -> NormReport:
    """Shared driver: sup over sample times of H^s plus weighted component sum."""
    wexp = cfg.weight_exponent
    rows = []
    sup_total = 0.0
    sup_hs = 0.0
    for t in cfg.sample_times:
        f = trajectory(t)
        hs = sobolev_norm(f, cfg.s)
        weighted = 0.0
        part_rows = []
        for name, norm_fn in weighted_parts:
            value = t ** wexp * norm_fn(f)
            part_rows.append((t, name, value))
            weighted += value
        if not np.isfinite(hs) or not np.isfinite(weighted):
            raise BlowUpError(f"non-finite norm at sample time t={t:g}")
        rows.append((t, "hs", hs))
        rows.extend(part_rows)
        sup_hs = max(sup_hs, hs)
        sup_total = max(sup_total, hs + weighted)
    return NormReport(space=space, h_s=sup_hs, components=rows, total=sup_total)


def x_norm(trajectory, cfg: WeightedNormConfig) -> NormReport:
    """Space norm for the conservative-form problem.

    Per sample t:  ||f(t)||_{H^s} + t^(gamma_k/p) * ( ||f||_{L^q}
    + ||d_x f||_{L^q} + ||D^s d_x f||_{L^q} ),  q = 2(k+1); the report's
    total is the max of the sum over sample times.
    """
    q = 2.0 * (cfg.k + 1.0)
    parts = [
        ("w_lq", lambda f: lebesgue_norm(f, q)),
        ("w_dx_lq", lambda f: lebesgue_norm(spatial_derivative(f), q)),
        ("w_dxs_lq", lambda f: lebesgue_norm(fractional_derivative_shifted(f, cfg.s), q)),
    ]
    return _weighted_report(trajectory, cfg, parts, space="x")


def y_norm(trajectory, cfg: WeightedNormConfig) -> NormReport:
    """Space norm for the gradient-form problem (two weighted components)."""
    q = 2.0 * (cfg.k + 1.0)
    parts = [
        ("w_dx_lq", lambda f: lebesgue_norm(spatial_derivative(f), q)),
        ("w_dxs_lq", lambda f: lebesgue_norm(fractional_derivative_shifted(f, cfg.s), q)),
    ]
    return _weighted_report(trajectory, cfg, parts, space="y")


def z_norm(trajectory, cfg: WeightedNormConfig) -> float:
    """Auxiliary smoothing norm: sup of H^s plus t^(gamma_k/p)*||f||_{L^(2k+1)}.

    The odd exponent 2k+1 is intentional and differs from the 2(k+1) used by
    x_norm/y_norm.
    """
    q = 2.0 * cfg.k + 1.0
    wexp = cfg.weight_exponent
    sup = 0.0
    for t in cfg.sample_times:
        f = trajectory(t)
        val = sobolev_norm(f, cfg.s) + t ** wexp * lebesgue_norm(f, q)
        if not np.isfinite(val):
            raise BlowUpError(f"non-finite norm at sample time t={t:g}")
        sup = max(sup, val)
    return sup


def z_tilde_norm(trajectory, cfg: WeightedNormConfig) -> float:
    """Auxiliary norm: sup of H^s plus t^((1+|s|)/p)*||d_x f||_{L^2}."""
    wexp = (1.0 + abs(cfg.s)) / cfg.p
    sup = 0.0
    for t in cfg.sample_times:
        f = trajectory(t)
        val = sobolev_norm(f, cfg.s) + t ** wexp * lebesgue_norm(spatial_derivative(f), 2)
        if not np.isfinite(val):
            raise BlowUpError(f"non-finite norm at sample time t={t:g}")
        sup = max(sup, val)
    return sup
