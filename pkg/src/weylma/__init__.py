"""W-invariant real Monge-Ampere equations for Ricci-flat Kaehler potentials."""

from .rootsys import RootSystem, build_root_system, chamber_membership, reflect_into_chamber, weyl_orbit

__all__ = ["RootSystem", "build_root_system", "chamber_membership", "reflect_into_chamber", "weyl_orbit"]
__version__ = "0.1.0"
