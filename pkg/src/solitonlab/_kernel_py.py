"""Pure-numpy fallback for the truncated-jet product kernel."""

import numpy as np

BACKEND = "python"


def jet_mul(a, b, ai, bi, coef, scatter):
    """Leibniz product of row-batched raw-partial jets.

    ``a`` and ``b`` are (N, ncoef) arrays; ``ai``/``bi``/``coef`` enumerate the
    (alpha, beta) pairs contributing to each output slot and ``scatter`` is the
    (npairs, ncoef) 0/1 matrix folding pairs onto output slots.
    """
    p = a[:, ai] * b[:, bi]
    p *= coef
    return p @ scatter
