"""Backend-dispatched kernel namespace.

Import kernels from here, not from the backend modules directly.
"""

from ._accel import BACKEND
from ._kernels_numba import (
    ETA_FLOOR,
    KIND_BOLTZMANN,
    KIND_FERMI12,
    KIND_FERMIM1,
    bern,
    bernp,
    f12_fpg,
    f12_inverse,
    f12_logpair,
    f32_logf,
    gamma_dens,
    h_fill,
    h_scalar,
    logmean,
    logmean_fill,
    phi_fill,
    phi_scalar,
    schottky_fill,
    stats_fpg,
    stats_inverse_fill,
    stats_inverse_scalar,
)

if BACKEND == "numba":
    from ._kernels_numba import bernoulli_pair_fill, interior_flux_fill, stats_fill
else:
    from ._kernels_numpy import bernoulli_pair_fill, interior_flux_fill, stats_fill

__all__ = [
    "BACKEND",
    "ETA_FLOOR",
    "KIND_BOLTZMANN",
    "KIND_FERMI12",
    "KIND_FERMIM1",
    "bern",
    "bernp",
    "bernoulli_pair_fill",
    "f12_fpg",
    "f12_inverse",
    "f12_logpair",
    "f32_logf",
    "gamma_dens",
    "h_fill",
    "h_scalar",
    "interior_flux_fill",
    "logmean",
    "logmean_fill",
    "phi_fill",
    "phi_scalar",
    "schottky_fill",
    "stats_fill",
    "stats_fpg",
    "stats_inverse_fill",
    "stats_inverse_scalar",
]
