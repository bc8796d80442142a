"""Generic filtered-algebra machinery: block decompositions, RD norms, and their checks."""
from .blocks import (BlockVector, RdNormTable, block_decompose, head_tail, random_block, rd_norm,
                     rd_norm_table, sub_blockvector)
from .contract import ContractViolation, FilteredAlgebra
from .sequences import SequenceAlgebra, SequenceElement
from .verify import (PBEReport, VerificationReport, fit_loglog_slope, log_t_grid, norm_equivalence_report,
                     pbe_experiment, verify_bimodularity, verify_block_product_lemma, verify_head_exponential,
                     verify_head_tail_product, verify_leibniz_pbe_pair, verify_projection,
                     verify_stage_norm_bound, verify_star_compatibility, verify_submultiplicative,
                     verify_tail_bound, verify_trotter_bound, verify_uniform_bound)

__all__ = [
    "BlockVector", "RdNormTable", "block_decompose", "head_tail", "random_block", "rd_norm", "rd_norm_table",
    "sub_blockvector", "ContractViolation", "FilteredAlgebra", "SequenceAlgebra", "SequenceElement",
    "PBEReport", "VerificationReport", "fit_loglog_slope", "log_t_grid", "norm_equivalence_report",
    "pbe_experiment", "verify_bimodularity", "verify_block_product_lemma", "verify_head_exponential",
    "verify_head_tail_product", "verify_leibniz_pbe_pair", "verify_projection", "verify_stage_norm_bound",
    "verify_star_compatibility", "verify_submultiplicative", "verify_tail_bound", "verify_trotter_bound",
    "verify_uniform_bound",
]
