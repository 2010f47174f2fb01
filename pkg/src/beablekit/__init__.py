"""Beable fields for photon/lump toy scenarios and Bell-type locality audits.

The package has five layers:

- ``spacetime``: events, intervals, causal classification, boosts (1+1D, c=1).
- ``toyqm``: two-branch photon/lump scenarios registered on a late surface,
  Born-rule world selection.
- ``beables``: conditional expected energy density at an event, conditioned on
  registrations strictly outside its future light cone; regime tables and
  sampled fields.
- ``locality``: finite hidden-variable models and audits of outcome
  independence, parameter independence, factorizability and no-conspiracy;
  CHSH statistics.
- ``models``: the spin-singlet Born model, a local deterministic model, and a
  two-particle pilot-wave toy with equilibrium statistics.

The ``beablekit`` console script exposes all of it as batch subcommands.
"""

__version__ = "0.1.0"
