from k3.polarisation import (ComplementProfile, E8Extraction, PolarisingLattice, VerificationReport,
                             complement_profile, extract_e8_and_complement, theorem_quartic_checks,
                             verify_polarising_decomposition)
