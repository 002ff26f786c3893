"""SO*(2N) coherent intertwiner states: closed forms, geometry and a Fock-space oracle."""
