"""Deterministic and randomized dynamical decoupling of interacting spin chains."""
