"""Combinatorics, signs and exact linear algebra for q-extended A∞ operations
on wrapped Floer groups and for their restriction maps."""

from .ainfty_engine import Chord, ConstantsTable, assemble_mu, check_ainfty, check_boundary_relation
from .field_algebra import Field
from .trees import Flavour

__all__ = ["Chord", "ConstantsTable", "Field", "Flavour", "assemble_mu", "check_ainfty",
           "check_boundary_relation"]
