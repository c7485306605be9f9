from lattice.gram import (Embedding, GramLattice, ImageLattice, LatticeProfile, RSCertificate,
                          image_lattice, invariant_factors, is_primitive_sublattice,
                          lattice_profile, orthogonal_complement, rudakov_shafarevich_certificate,
                          saturated_kernel, smith_normal_form)
from lattice.search import (IsometrySearch, find_isometry, is_isometric_bounded, reduce_binary_form,
                            represent)
from lattice.standard import K3_SPEC, LatticeSpec, parse_lattice_spec, standard_lattice
