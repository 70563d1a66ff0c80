"""Port-Hamiltonian marine craft simulator with virtual-differential-passivity tracking control."""

__version__ = '0.1.0'
