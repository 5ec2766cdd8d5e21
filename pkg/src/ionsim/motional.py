"""Motional-mode mathematics for a two-ion crystal: associated Laguerre
polynomials, Lamb-Dicke coupling factors, scaled sideband Rabi factors and
thermal Fock distributions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

#: Stretch-to-CM frequency ratio nu_r / nu of a two-ion crystal.
NU_RATIO_DEFAULT = math.sqrt(3.0)

#: Default acceptable thermal tail mass beyond the Fock cutoff.
TAIL_TOL_DEFAULT = 1e-6


def default_eta_r(eta: float, nu_ratio: float = NU_RATIO_DEFAULT) -> float:
    """Relative-mode Lamb-Dicke parameter from oscillator-length scaling,
    eta_r = eta * (nu / nu_r)**0.5."""
    return eta * nu_ratio ** -0.5


@dataclass(frozen=True)
class ModeParams:
    """Lamb-Dicke parameters of the CM and stretch modes.

    ``eta_r`` defaults to the oscillator-length convention
    eta * nu_ratio**-0.5 when omitted.
    """

    eta: float
    eta_r: float | None = None
    nu_ratio: float = NU_RATIO_DEFAULT

    def __post_init__(self) -> None:
        if self.eta_r is None:
            object.__setattr__(self, "eta_r", default_eta_r(self.eta, self.nu_ratio))
        if not self.eta > 0 or not self.eta_r > 0:
            raise ValueError("Lamb-Dicke parameters must be positive")
        if not self.nu_ratio > 1:
            raise ValueError("nu_ratio must exceed 1")


def laguerre(m: int, k: int, x: float) -> float:
    """Associated Laguerre polynomial L_m^k(x) by the three-term recurrence
    (m+1) L_{m+1}^k = (2m+k+1-x) L_m^k - (m+k) L_{m-1}^k."""
    if m < 0 or k < 0:
        raise ValueError("Laguerre indices must be nonnegative")
    if m == 0:
        return 1.0
    prev = 1.0
    curr = 1.0 + k - x
    for j in range(1, m):
        prev, curr = curr, ((2 * j + k + 1 - x) * curr - (j + k) * prev) / (j + 1)
    return curr


def _rising(n: int, k: int) -> float:
    """(n+k)! / n! as a k-term product."""
    out = 1.0
    for j in range(n + 1, n + k + 1):
        out *= j
    return out


def coupling_factor(k: int, n: int, n_r: int, p: ModeParams) -> float:
    """Lamb-Dicke coupling factor of the k-th sideband on the Fock sector (n, n_r):

        f_k(n, n_r) = exp(-(eta^2 + eta_r^2)/2) * n!/(n+k)!
                      * L_n^k(eta^2) * L_{n_r}^0(eta_r^2)

    The factorial ratio is evaluated as a product so large n stays finite.
    """
    if k < 0 or n < 0 or n_r < 0:
        raise ValueError("sideband order and Fock indices must be nonnegative")
    gauss = math.exp(-(p.eta**2 + p.eta_r**2) / 2.0)
    return gauss / _rising(n, k) * laguerre(n, k, p.eta**2) * laguerre(n_r, 0, p.eta_r**2)


def rabi_frequency(k: int, n: int, n_r: int, p: ModeParams) -> float:
    """Scaled sideband Rabi factor of the Fock sector (n, n_r), in units of the
    two-photon drive strength of the k-th sideband:

        f_k^2(n-k, n_r) n!/(n-k)!  -  f_k^2(n, n_r) (n+k)!/n!

    The first term vanishes for n < k (there are no k phonons to annihilate),
    and k = 0 yields exactly zero: without exchanged phonons the two virtual
    one-ion transitions cancel.
    """
    if k < 0:
        raise ValueError("sideband order must be nonnegative")
    if k == 0:
        return 0.0
    term = 0.0
    if n >= k:
        term = coupling_factor(k, n - k, n_r, p) ** 2 * _rising(n - k, k)
    return term - coupling_factor(k, n, n_r, p) ** 2 * _rising(n, k)


def matched_nbar_r(nbar: float, nu_ratio: float = NU_RATIO_DEFAULT) -> float:
    """Stretch-mode mean occupation at the temperature fixed by the CM mean
    occupation: nbar_r = 1 / ((1/nbar + 1)**(nu_r/nu) - 1)."""
    if nbar < 0:
        raise ValueError("mean occupation must be nonnegative")
    if nbar == 0:
        return 0.0
    # evaluate in log space; for tiny nbar the denominator overflows while
    # the result itself underflows smoothly to 0
    exponent = nu_ratio * math.log1p(1.0 / nbar)
    if exponent > 700.0:
        return math.exp(-exponent)
    return 1.0 / math.expm1(exponent)


def cutoff_for(nbar: float, tail_tol: float = TAIL_TOL_DEFAULT) -> int:
    """Smallest Fock cutoff N whose geometric tail mass beyond N is below
    ``tail_tol``."""
    if not 0 < tail_tol < 1:
        raise ValueError("tail_tol must lie in (0, 1)")
    if nbar <= 0:
        return 0
    ratio = nbar / (1.0 + nbar)
    return max(0, math.ceil(math.log(tail_tol) / math.log(ratio)) - 1)


def thermal_weights(nbar: float, cutoff: int) -> np.ndarray:
    """Raw Bose-Einstein weights nbar^n / (1+nbar)^(n+1) for n = 0..cutoff.

    The returned array is not renormalized; it sums to one minus the tail mass.
    """
    if nbar < 0 or cutoff < 0:
        raise ValueError("mean occupation and cutoff must be nonnegative")
    if nbar == 0:
        w = np.zeros(cutoff + 1)
        w[0] = 1.0
        return w
    n = np.arange(cutoff + 1, dtype=float)
    return np.exp(n * math.log(nbar) - (n + 1) * math.log(1.0 + nbar))


@dataclass(frozen=True, eq=False)
class ThermalSpec:
    """Truncated two-mode thermal distribution over Fock labels (n, n_r).

    ``weights[n, n_r]`` is renormalized to total mass one; ``tail_mass``
    records the probability discarded by the truncation.
    """

    nbar: float
    nbar_r: float
    cutoff: int
    cutoff_r: int
    weights: np.ndarray
    tail_mass: float

    def __post_init__(self) -> None:
        if np.any(self.weights < 0):
            raise ValueError("thermal weights must be nonnegative")
        total = float(self.weights.sum())
        if abs(total - 1.0) > 1e-14:
            raise ValueError(f"thermal weights sum to {total!r}, expected 1")

    def sectors(self):
        """Iterate (n, n_r, weight) in fixed row-major order."""
        for n in range(self.cutoff + 1):
            for n_r in range(self.cutoff_r + 1):
                yield n, n_r, float(self.weights[n, n_r])


def thermal_distribution(
    nbar: float,
    nbar_r: float,
    cutoff: int,
    cutoff_r: int | None = None,
    tail_tol: float = TAIL_TOL_DEFAULT,
) -> ThermalSpec:
    """Product of two single-mode thermal distributions, truncated and
    renormalized over the (cutoff+1) x (cutoff_r+1) Fock grid.

    A truncation whose discarded tail mass exceeds ``tail_tol`` triggers a
    warning, not an error.
    """
    if cutoff_r is None:
        cutoff_r = cutoff
    w = np.outer(thermal_weights(nbar, cutoff), thermal_weights(nbar_r, cutoff_r))
    mass = float(w.sum())
    tail = 1.0 - mass
    if tail > tail_tol:
        warnings.warn(
            f"thermal truncation at cutoffs ({cutoff}, {cutoff_r}) leaves tail mass "
            f"{tail:.3e} > {tail_tol:.0e}",
            stacklevel=2,
        )
    return ThermalSpec(
        nbar=nbar,
        nbar_r=nbar_r,
        cutoff=cutoff,
        cutoff_r=cutoff_r,
        weights=w / mass,
        tail_mass=tail,
    )
