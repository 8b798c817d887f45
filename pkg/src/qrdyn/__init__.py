"""Quasiregular dynamics from strongly automorphic maps: Zorich- and
sine-type carriers, power and Chebyshev-type maps, Julia rasters and
Denjoy-Wolff experiments in dimensions 2 and 3."""
from ._backend import BACKEND
from .automorphic import AutomorphicMap, sine_map, zorich_map
from .crystal import CrystGroup, check_admissible, get_group, orbit_points, reduce, stabilizer
from .errors import (BeamRangeError, BranchPointError, ConfigError, DegenerateTargetError,
                     DomainError, NotFixedPointError, OmittedValueError, QrdynError)
from .geometry import BallMobius, Isometry, chordal_distance
from .schroeder import (ConformalAutomorphism, QcDeformation, SchroederMap, cheb_map, conjugate,
                        h_d_eval, involution_eval, joukowsky_eval, linearize, power_map, preimages)

__version__ = "0.1.0"
