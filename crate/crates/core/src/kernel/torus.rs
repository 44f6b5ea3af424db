//! Kernel integrals on the finite torus used by the simulators.
