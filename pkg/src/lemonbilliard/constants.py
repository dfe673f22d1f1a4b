"""Critical parameter values of the lemon family, each with a residual."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import genmap as gm
from . import parallel as pl
from . import periodic as pd
from .geometry import LineState, Table

S0 = 2 ** -0.5

# half the minimum of the grid residual found by a 200001-point scan along
# S_{1,+} at each of the 50 grid values of b (minimum 0.0195393 at b ~ 1.703)
THRESHOLD_FGF = 9.7e-3


@dataclass
class Constant:
    name: str
    value: float
    residual: float


def b_crit() -> Constant:
    b = pd.find_b_crit()
    return Constant("b_crit", b, pd.f_trace(b) + 1.0)


def alpha0() -> Constant:
    a = pl.solve_alpha0()
    return Constant("alpha0", a, float(pl.F_J(a, a)))


def _b2_eq(b):
    return b - (1 + math.sqrt(8 * b * b + 1)) / (4 * b) - S0


def b2() -> Constant:
    b = brentq(_b2_eq, 1.5, 1.7, xtol=1e-15)
    return Constant("b2", b, _b2_eq(b))


def dl3(b: float) -> float:
    """First coordinate of Phi_b(R_b L_b(S0)); R_b acts on the branched locus here."""
    t = Table(b)
    x = gm.apply_L(t, LineState(S0, S0), allow_branch=True)
    x = gm.apply_R(t, x, allow_branch=True)
    return gm.apply(t, gm.GenMapKind.Phi, x, allow_branch=True).d_left


def b3() -> Constant:
    b = brentq(dl3, 1.62, 1.625, xtol=1e-15)
    return Constant("b3", b, dl3(b))


def _alpha_sing() -> float:
    # the J-curve point whose diagonal corner sits at S0
    return brentq(lambda a: float(pl.F_J(a, math.pi / 4)), 0.3, 0.7, xtol=1e-15)


def b_sing() -> Constant:
    a = _alpha_sing()
    return Constant("b_sing", float(pl.bfrak(a, math.pi / 4)), float(pl.F_J(a, math.pi / 4)))


def diag_gap_S0(b: float) -> float:
    u, v = gm.apply_xy(b, gm.GenMapKind.Phi, S0, S0)
    return float(u - v)


def b_sing_diagonal() -> Constant:
    """Second route: b where Phi_b maps S0 back to the diagonal, so E1(b) = S0."""
    b = brentq(diag_gap_S0, 1.66, 1.70, xtol=1e-15)
    return Constant("b_sing_diagonal", b, diag_gap_S0(b))


def b_max() -> Constant:
    return Constant("b_max", gm.b_max(), 0.0)


def all_constants() -> list[Constant]:
    return [b_crit(), alpha0(), b2(), b3(), b_sing(), b_sing_diagonal(), b_max()]


# FGF bound: L_b I has no common value with R_b L_b on S_{1,+}

def fgf_residual(b: float, n: int = 200) -> np.ndarray:
    """|L_b I(x) - R_b L_b(x)| on n samples of S_{1,+}(b)."""
    c = gm.singular_curve(Table(b), gm.SingularCurveId.S1plus, n).points
    u = np.column_stack(gm.L_xy(b, c[:, 1], c[:, 0]))
    v = np.column_stack(gm.R_xy(b, *gm.L_xy(b, c[:, 0], c[:, 1])))
    return np.linalg.norm(u - v, axis=1)


def fgf_grid(n_b: int = 50) -> np.ndarray:
    """Open grid of n_b values in (1.5, b_max)."""
    return np.linspace(1.5, gm.b_max(), n_b + 2)[1:-1]


def fgf_min(n_b: int = 50, n: int = 200) -> float:
    return float(min(np.nanmin(fgf_residual(b, n)) for b in fgf_grid(n_b)))
