"""Extended-precision RK4 for profiles whose ``n(t)`` grows exponentially.

When the Euclidean size of ``n`` reaches ``|n|``, rounding ``n`` to double
precision already perturbs ``n**2`` by about ``eps * |n|**2``; the one-step
propagator then has condition number about ``|n|**2``.  For the boosted
families this exceeds ``1e16`` near ``phi = 4 pi``, so the same RK4 scheme is
run here in ``gmpy2.mpfr`` arithmetic with the profile evaluated at the
working precision.
"""

from __future__ import annotations

import math

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .errors import ConfigError


def bits_for(n_max: float, extra: int = 48) -> int:
    """Working precision that absorbs the ``|n|**2`` conditioning."""
    return max(113, 53 + 2 * int(math.ceil(math.log2(max(n_max, 1.0)))) + extra)


def _gen(w, n):
    """Rows of ``2 w X(n)`` and ``w A(n)`` for mpfr inputs."""
    n1, n2, n3 = n
    b0, b1, b2 = -n1, -n2, n3
    c = -2 * w
    X = ((0, c * b2, c * b1), (-c * b2, 0, -c * b0), (c * b1, -c * b0, 0))
    A = ((w * n2, w * (n1 + n3)), (w * (n1 - n3), -w * n2))
    return X, A


def _mul(A, Y):
    cols = tuple(zip(*Y))
    return tuple(tuple(sum(a * y for a, y in zip(row, col)) for col in cols) for row in A)


def _axpy(Y, a, K):
    return tuple(tuple(y + a * k for y, k in zip(ry, rk)) for ry, rk in zip(Y, K))


def _comb(Y, h6, k1, k2, k3, k4):
    return tuple(
        tuple(y + h6 * (a + 2 * b + 2 * c + d) for y, a, b, c, d in zip(*rows))
        for rows in zip(Y, k1, k2, k3, k4)
    )


def rk4(profile, e0, grid, counts, raw_mode: bool, bits: int):
    """Same scheme as :func:`propagate.integrate`, returned as float arrays."""
    hp = getattr(profile, "hp", None)
    if hp is None:
        raise ConfigError("extended precision needs a profile with a closed-form evaluator")
    N = len(grid)
    e_out = np.empty((N, 3))
    E_out = np.empty((N, 3, 3))
    Q_out = np.empty((N, 2, 2))
    A1 = np.zeros(N)
    A2 = np.zeros(N)
    span = np.zeros(N)
    gd = np.zeros(N)
    dr = np.zeros(N)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        one, zero = mpfr(1), mpfr(0)
        Y = tuple(
            tuple([one if i == j else zero for j in range(3)] + [mpfr(float(e0[i]))]) for i in range(3)
        )
        Q = ((one, zero), (zero, one))
        a1 = a2 = s = zero
        e0sq = _mdot(tuple(Y[r][3] for r in range(3)), tuple(Y[r][3] for r in range(3)))
        e_out[0], E_out[0], Q_out[0] = e0, np.eye(3), np.eye(2)
        for i in range(N - 1):
            ta, tb = mpfr(float(grid[i])), mpfr(float(grid[i + 1]))
            m = int(counts[i])
            h = (tb - ta) / m
            h2, h6 = h / 2, h / 6
            for j in range(m):
                t = ta + j * h
                stages = [hp(t), hp(t + h2), hp(t + h)]
                (Xa, Aa), (Xb, Ab), (Xc, Ac) = (_gen(w, n) for w, n, _ in stages)
                k1 = _mul(Xa, Y)
                y2 = _axpy(Y, h2, k1)
                k2 = _mul(Xb, y2)
                y3 = _axpy(Y, h2, k2)
                k3 = _mul(Xb, y3)
                y4 = _axpy(Y, h, k3)
                k4 = _mul(Xc, y4)
                if not raw_mode:
                    ws = (stages[0], stages[1], stages[1], stages[2])
                    f1 = f2 = zero
                    for wt, yy, kk, (w, n, _) in zip((1, 2, 2, 1), (Y, y2, y3, y4), (k1, k2, k3, k4), ws):
                        e1, e2, e3 = yy[0][3], yy[1][3], yy[2][3]
                        d1, d2 = kk[0][3], kk[1][3]
                        f1 += wt * (e1 * d2 - d1 * e2) / (2 * (e3 + 1))
                        f2 += wt * w * (e3 * n[2] - e1 * n[0] - e2 * n[1])
                    a1 += h6 * f1
                    a2 += h6 * f2
                s += h6 * (stages[0][2] + 4 * stages[1][2] + stages[2][2]) / 2
                Y = _comb(Y, h6, k1, k2, k3, k4)
                q1 = _mul(Aa, Q)
                q2 = _mul(Ab, _axpy(Q, h2, q1))
                q3 = _mul(Ab, _axpy(Q, h2, q2))
                q4 = _mul(Ac, _axpy(Q, h, q3))
                Q = _comb(Q, h6, q1, q2, q3, q4)
            k = i + 1
            E_out[k] = [[float(Y[r][c]) for c in range(3)] for r in range(3)]
            e_out[k] = [float(Y[r][3]) for r in range(3)]
            Q_out[k] = [[float(x) for x in row] for row in Q]
            A1[k], A2[k], span[k] = float(a1), float(a2), float(s)
            gd[k], dr[k] = _defects(Y, e0sq)
    return e_out, E_out, Q_out, A1, A2, span, gd, dr


def _mdot(a, b):
    return a[2] * b[2] - a[0] * b[0] - a[1] * b[1]


def _defects(Y, e0sq):
    cols = [tuple(Y[r][c] for r in range(3)) for c in range(4)]
    g = ((-1, 0, 0), (0, -1, 0), (0, 0, 1))
    worst = max(abs(_mdot(cols[i], cols[j]) - g[i][j]) for i in range(3) for j in range(3))
    return float(worst), float(abs(_mdot(cols[3], cols[3]) - e0sq))
