from blocks.descriptor import BlockDescriptor, BlockEvaluation, C2Result, c2_block, evaluate_block
from blocks.invariants import (AcylProfile, BlowupSpec, FanoDescriptor, SmoothingData,
                               acyl_profile, betti3_semifano, block_cohomology, blowup_numbers,
                               c2_restriction, defect, fano_block_row, flop_update, genus_degree,
                               namikawa_check, riemann_roch_3fold, rigidity_h1)
