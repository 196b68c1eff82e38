"""Symbolic workbench for minimal-subtraction counterterms of ladder-type
topologies built from concatenated one-loop functions, together with the
braid and Euler-sum bookkeeping that goes with them."""

__version__ = "0.1.0"
