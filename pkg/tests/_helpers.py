"""Shared test fixtures-by-hand: masked views in chosen acceptance states."""

import numpy as np

from signedknockoff.procedure import ProcedureState, build_pairs, masked_view, region_for


def make_view(q, i=0, j=0):
    """Masked view after accepting the i/j nearest pairs per side."""
    pairs = build_pairs(q)
    accepted = np.zeros(pairs.n, dtype=bool)
    accepted[pairs.pos_order[:i]] = True
    accepted[pairs.neg_order[:j]] = True
    state = ProcedureState(
        k=i + j, i=i, j=j, region=region_for(pairs, i, j), accepted=accepted
    )
    return masked_view(pairs, state)


def revealed_view(q):
    pairs = build_pairs(q)
    return make_view(q, pairs.n_plus, pairs.n_minus)
