"""Default tolerances shared by the numerical routines."""

from dataclasses import dataclass


@dataclass
class Tolerances:
    #: unit-norm checks on inputs (rank-one factors, face anchors)
    unit: float = 1e-8
    #: a functional counts as a face element when |f(u) - 1| is below this
    face: float = 1e-8
    #: relative slack when deciding that a vector attains the operator norm
    attain: float = 1e-9
    #: operators below this norm cannot be normalized
    tiny_opnorm: float = 1e-9
    #: a spear test fails once the deficit drops below this
    spear: float = 1e-4
    #: a radius below this counts as a null direction
    null_radius: float = 1e-3


TOL = Tolerances()
