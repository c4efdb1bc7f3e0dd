"""Numerics for variational problems posed on eps-indexed nets of smooth functions."""

from .nets import (
    EpsGrid,
    GenMatrix,
    GenNumber,
    GenPoint,
    GenVector,
    GridNet,
    NetError,
    SpatialGrid,
    eval_at,
    gen_number,
    make_eps_grid,
    make_zero_divisor_pair,
)

__all__ = [
    "EpsGrid",
    "GenMatrix",
    "GenNumber",
    "GenPoint",
    "GenVector",
    "GridNet",
    "NetError",
    "SpatialGrid",
    "eval_at",
    "gen_number",
    "make_eps_grid",
    "make_zero_divisor_pair",
]
__version__ = "0.1.0"
