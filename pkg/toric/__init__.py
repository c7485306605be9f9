from toric.fan import (DiagonalAction, FanInvariants, FanResolution, Projectivity,
                       ResolutionClasses, Wall, check_projectivity_certificate, choice_orbits,
                       diagonal_actions, enumerate_resolutions, fan_invariants, fan_walls,
                       is_projective, picard_basis, relabel, resolution_block_descriptor,
                       resolution_classes, resolution_for_choice, triple_intersections)
from toric.polytope import (Facet, LatticePolytope, PolytopeProfile, automorphisms, cartier_rank,
                            convex_hull, dual_polytope, is_unimodular_equivalent,
                            normalized_volume, parse_polytope, parse_polytopes, polytope_profile)
from toric.simplex import LPResult, maximize
