"""Linear propagator exp(i t xi^3 + eta t Phi(xi)) and Duhamel quadrature.

The propagator combines Airy dispersion with the dissipative symbol; it is a
forward-only semigroup for eta > 0.  The Duhamel integral against it uses
composite 4-node Gauss-Legendre panels on a graded mesh tau_j = t*(j/m)^g,
clustering nodes near tau = 0 where rough-data forcings carry an integrable
power-law weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ResolutionError, StructuralError
from .spectral import (
    GridSpec,
    SpectralField,
    _odd_multiplier_frequencies,
    apply_multiplier_values,
    inverse_transform,
    zero_field,
    _require_coherent,
)
from .symbols import DissipativeSymbol, evaluate_phi

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class Propagator:
    """Mode-wise exact solution operator of the linear equation."""

    symbol: DissipativeSymbol
    grid: GridSpec

    @cached_property
    def exponent(self) -> np.ndarray:
        """Per-mode exponent z = i*xi^3 + eta*Phi(xi).

        The odd dispersive phase is dropped on the unpaired Nyquist mode,
        which only dissipates; a rotating Nyquist coefficient has no real
        representation on the grid.
        """
        xi_disp = _odd_multiplier_frequencies(self.grid)
        return 1j * xi_disp ** 3 + self.symbol.eta * evaluate_phi(self.symbol, self.grid.xi)

    def multiplier(self, t: float) -> np.ndarray:
        return np.exp(t * self.exponent)


def apply_semigroup(prop: Propagator, w0: SpectralField, t: float) -> SpectralField:
    """Evolve w0 forward by time t >= 0."""
    if t < 0:
        raise ValueError(
            f"semigroup not invertible for eta > 0; got negative time t={t}"
        )
    if w0.grid != prop.grid:
        raise StructuralError("field grid does not match the propagator grid")
    return apply_multiplier_values(w0, prop.multiplier(t))


def free_trajectory(prop: Propagator, w0: SpectralField):
    """Return the callable t -> V(t) w0."""
    _require_coherent(w0)
    return lambda t: apply_semigroup(prop, w0, t)


def duhamel_integral(
    prop: Propagator,
    forcing,
    t: float,
    panels: int = 16,
    grading: float = 2.0,
) -> SpectralField:
    """Approximate int_0^t V(t - tau) forcing(tau) dtau.

    forcing is a callable tau -> SpectralField on the propagator grid.  The
    quadrature is composite Gauss-Legendre (4 nodes per panel) on the graded
    mesh tau_j = t*(j/panels)^grading; t = 0 returns the zero field.
    """
    if t < 0 or t > 1:
        raise ValueError(f"integration time must lie in [0, 1], got {t}")
    if panels < 1:
        raise ValueError("panels must be >= 1")
    if grading < 1:
        raise ValueError("grading must be >= 1")
    if t == 0:
        return zero_field(prop.grid)
    bounds = t * (np.arange(panels + 1) / panels) ** grading
    acc = np.zeros(prop.grid.n_points, dtype=complex)
    for a, b in zip(bounds[:-1], bounds[1:]):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
            tau = mid + half * node
            field = forcing(tau)
            if not isinstance(field, SpectralField) or field.grid != prop.grid:
                raise StructuralError("forcing returned a field on an incompatible grid")
            _require_coherent(field)
            acc += (half * weight) * prop.multiplier(t - tau) * field.spec
    return inverse_transform(SpectralField(prop.grid, spec=acc))


def smoothing_norm_profile(
    sym: DissipativeSymbol, theta: float, taus, grid: GridSpec
) -> list[float]:
    """sup over grid frequencies of (1+|xi|)^theta * exp(eta*tau*Phi(xi)) per tau.

    The maximizer must be interior to the resolved frequency range; otherwise
    the lattice cannot represent the supremum and a ResolutionError advises a
    finer or larger grid.
    """
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    taus = np.asarray(taus, dtype=float)
    if np.any(taus <= 0) or np.any(taus > 1):
        raise ValueError("every tau must lie in (0, 1]")
    xs = np.abs(grid.xi)
    xi_top = xs.max()
    weight = (1.0 + xs) ** theta
    phi = np.asarray(evaluate_phi(sym, grid.xi), dtype=float)
    out = []
    for tau in taus:
        vals = weight * np.exp(sym.eta * tau * phi)
        i = int(np.argmax(vals))
        if xs[i] >= xi_top:
            raise ResolutionError(
                f"profile maximizer sits at the lattice edge |xi|={xs[i]:.4g} for "
                f"tau={tau:.3e}; use a grid with a larger frequency range"
            )
        out.append(float(vals[i]))
    return out
