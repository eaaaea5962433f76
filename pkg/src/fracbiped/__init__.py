"""Fractional-order sliding-mode control of hybrid port-Hamiltonian bipeds."""

__version__ = "0.1.0"
