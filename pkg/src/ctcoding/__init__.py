"""Content-type coding: combination-network gains, erasure broadcasting with
feedback, and pliable index coding over prime fields."""

__version__ = "0.1.0"
