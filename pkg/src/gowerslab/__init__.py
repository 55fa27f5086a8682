"""gowerslab: exact higher-order Fourier analysis on finite abelian groups.

Desk-scale, exhaustively verified implementations of Gowers uniformity
norms, cut and box norms, phase and projected phase polynomials,
polynomial cross-sections of surjective homomorphisms, subgroup-complement
algorithms for bounded-torsion groups, and the cocycle-averaging /
coboundary-splitting machinery on Host-Kra cube sets of filtered abelian
group nilspaces.
"""

__version__ = "0.1.0"
