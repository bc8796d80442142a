"""Finite-stage truncations of filtered C*-algebras and numerical checks of their rapid-decay norms."""
from . import bunce_deddens, dihedral, numerics, odometer, rdcore, scales, uhf
from .bunce_deddens import BDAlgebra, BDElement, BlochElement
from .dihedral import DihedralAlgebra, SDElement
from .odometer import OdometerAlgebra, OdometerElement
from .rdcore import FilteredAlgebra, SequenceAlgebra, VerificationReport, block_decompose, rd_norm
from .scales import Character, LengthSequence, SupernaturalScale
from .uhf import UHFAlgebra, UHFElement

__version__ = "0.1.0"

__all__ = [
    "bunce_deddens", "dihedral", "numerics", "odometer", "rdcore", "scales", "uhf",
    "BDAlgebra", "BDElement", "BlochElement", "DihedralAlgebra", "SDElement", "OdometerAlgebra",
    "OdometerElement", "FilteredAlgebra", "SequenceAlgebra", "VerificationReport", "block_decompose", "rd_norm",
    "Character", "LengthSequence", "SupernaturalScale", "UHFAlgebra", "UHFElement", "__version__",
]
