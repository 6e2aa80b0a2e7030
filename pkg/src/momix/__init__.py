"""momix: exact sheaves on moment graphs at desk scale.

Builds Bruhat moment graphs for small Coxeter types, runs the
Braden-MacPherson construction over exact coefficient fields, works in the
bounded homotopy category of the resulting sheaves (standard/costandard
objects, perversity, Rouquier complexes), and verifies the computable
identities of the theory against independent oracles.
"""

__version__ = "0.1.0"
