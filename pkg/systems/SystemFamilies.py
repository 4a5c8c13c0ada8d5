import logging

import numpy as np

from numerics.LinearAlgebra import spectral_radius
from numerics.NumericsError import ConfigError
from systems.LtiSystem import LtiSystem

logger = logging.getLogger(__name__)

CONFIG = {
    'spectral_radius': 0.8,
    'max_draws': 100,
}

FAMILIES = ('full', 'first_row')


def family_mask(family, p, l, m):
    if family == 'full':
        return LtiSystem.full_mask(p, l, m)
    if family == 'first_row':
        return tuple(('A', 0, j) for j in range(p))
    raise ConfigError(f"Unknown system family {family!r}, expected one of {FAMILIES}")


def random_lti(p, l, m, rng, family='full', radius=None, require_minimal=True):
    """
    Random stable plant with A scaled to the given spectral radius.

    With require_minimal the draw is repeated until (A, B) is controllable and
    (A, C) is observable.
    """
    radius = CONFIG['spectral_radius'] if radius is None else radius
    mask = family_mask(family, p, l, m)
    for draw in range(CONFIG['max_draws']):
        A = rng.standard_normal((p, p))
        rho = spectral_radius(A)
        if rho > 0:
            A = A * (radius / rho)
        system = LtiSystem(A, rng.standard_normal((p, l)), rng.standard_normal((m, p)), mask)
        if not require_minimal or (system.is_controllable() and system.is_observable()):
            return system
        logger.debug(
            "Rejected non-minimal draw",
            extra={
                "json": {
                    "draw": draw,
                    "p": p,
                    "l": l,
                    "m": m
                }
            })
    raise ConfigError(f"No controllable and observable draw within {CONFIG['max_draws']} attempts")


def full_family(rng, p=4, l=4, m=4, radius=None):
    """Every entry of A, B and C is a free parameter."""
    return random_lti(p, l, m, rng, 'full', radius)


def first_row_family(rng, p=4, l=4, m=4, radius=None):
    """Only the first row of A is free; the remaining entries are fixed constants."""
    return random_lti(p, l, m, rng, 'first_row', radius)
