"""Near-equilibrium propagation training for driven-dissipative lattice GPE systems."""
