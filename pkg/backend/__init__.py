"""HTTP surface for thetastrat runs."""
