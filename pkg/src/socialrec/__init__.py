"""Recommender for social learning environments.

Store, multi-strategy engine, hot-swappable profiles, REST service and an
offline evaluation harness.
"""

from socialrec.engine import Engine, GoalSpec, Neighborhood, RankedEntry, RankedList
from socialrec.errors import NotFoundError, ValidationError
from socialrec.profiles import Algorithm, ProfileRegistry, RecommendationProfile, Signal
from socialrec.store import DatasetStats, Interaction, Resource, Store, TagAssignment, TermVector

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "DatasetStats",
    "Engine",
    "GoalSpec",
    "Interaction",
    "Neighborhood",
    "NotFoundError",
    "ProfileRegistry",
    "RankedEntry",
    "RankedList",
    "RecommendationProfile",
    "Resource",
    "Signal",
    "Store",
    "TagAssignment",
    "TermVector",
    "ValidationError",
]
