"""Exact-arithmetic invariant laminations of the circle under angle multiplication.

The package builds, validates, audits, and renders finite-depth invariant
laminations for the maps a -> d*a mod 1 (d = 2, 3), realizes cubic
quadratically-critical portraits over a fixed critical leaf, and assembles
desk-scale samples of the associated parameter lamination.
"""

from .circle import (
    Angle,
    CircleMap,
    OrbitProfile,
    angle,
    cyclically_ordered,
    is_periodic,
    map_angle,
    orbit_profile,
    period_of,
    preimages,
)
from .chords import (
    CentralStrip,
    Chord,
    central_strip,
    chord,
    chord_image,
    is_critical,
    is_linked,
    min_arc_length,
    point,
    strip_entry_check,
)
from .lamination import (
    AngleClassPartition,
    GeoLamination,
    PropernessReport,
    equivalence_classes,
    lamination,
    proper_core,
    properness_report,
    sibling_collections,
    validate,
)
from .errors import (
    DomainError,
    ExcludedCaseError,
    IntegrityError,
    LaminaError,
    NotFoundError,
    ParseError,
    PartialMapError,
)

__version__ = "0.1.0"
