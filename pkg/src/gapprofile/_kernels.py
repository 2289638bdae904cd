"""Compiled inner loops for the rolling profile scan.

Everything here is scalar code over preallocated arrays; the callers own
all allocation.  Case labels use the integer values of
:class:`gapprofile.bounds.CaseLabel`.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LABEL_COMPLETE = 1
LABEL_ONE_MISSING = 2
LABEL_BOTH_MISSING = 3
LABEL_NO_OVERLAP = 4
LABEL_ALL_MISSING = 5


@njit(cache=True, nogil=True)
def roll_dot_rows(qz, qb, bz, zb, bx, xb, z, b, x,
                  qz0, qb0, bz0, zb0, bx0, xb0, i, m):
    """Advance all six dot rows from anchor i-1 to anchor i, in place.

    Right-to-left order keeps the previous anchor's value readable at j-1.
    Entry 0 cannot be rolled; it is restored from the frozen anchor-0 rows.
    The mixed streams swap sources there: dot(B_i, Z_0) is the ZB first row
    evaluated at i, not the BZ one (and likewise for BX/XB).
    """
    n_rows = qz.shape[0]
    za = z[i - 1]
    zt = z[i + m - 1]
    ba = b[i - 1]
    bt = b[i + m - 1]
    xa = x[i - 1]
    xt = x[i + m - 1]
    for j in range(n_rows - 1, 0, -1):
        zh = z[j - 1]
        bh = b[j - 1]
        xh = x[j - 1]
        zj = z[j + m - 1]
        bj = b[j + m - 1]
        xj = x[j + m - 1]
        qz[j] = qz[j - 1] - za * zh + zt * zj
        qb[j] = qb[j - 1] - ba * bh + bt * bj
        bz[j] = bz[j - 1] - ba * zh + bt * zj
        zb[j] = zb[j - 1] - za * bh + zt * bj
        bx[j] = bx[j - 1] - ba * xh + bt * xj
        xb[j] = xb[j - 1] - xa * bh + xt * bj
    qz[0] = qz0[i]
    qb[0] = qb0[i]
    bz[0] = zb0[i]
    zb[0] = bz0[i]
    bx[0] = xb0[i]
    xb[0] = bx0[i]


@njit(cache=True, nogil=True)
def roll_dot_row_single(qz, z, qz0, i, m):
    """Advance just the value-value dot row (complete-series fast path)."""
    n_rows = qz.shape[0]
    za = z[i - 1]
    zt = z[i + m - 1]
    for j in range(n_rows - 1, 0, -1):
        qz[j] = qz[j - 1] - za * z[j - 1] + zt * z[j + m - 1]
    qz[0] = qz0[i]


@njit(cache=True, nogil=True)
def lb_distance_row(qz, qb, bz, zb, bx, xb,
                    m, eps,
                    complete_w, empty_w, inv_full_var, inv_den3,
                    complete_i, empty_i, inv_full_var_i, inv_den3_i,
                    ams_value, out_d, out_label):
    """Squared lower bounds from anchor i to every window j, with labels.

    Scalar per-pair dispatch over the six rolled dot products and the
    per-window precomputations.  qb entries are exact integer counts, so
    the completeness test qb == m is exact.
    """
    two_m = 2.0 * m
    for j in range(qz.shape[0]):
        if empty_i or empty_w[j]:
            out_d[j] = ams_value
            out_label[j] = LABEL_ALL_MISSING
            continue
        nb = qb[j]
        if nb == 0.0:
            out_d[j] = 0.0
            out_label[j] = LABEL_NO_OVERLAP
            continue
        inv_nb = 1.0 / nb
        ui = zb[j] * inv_nb
        uj = bz[j] * inv_nb
        vi = xb[j] * inv_nb - ui * ui
        vj = bx[j] * inv_nb - uj * uj
        if vi < 0.0:
            vi = 0.0
        if vj < 0.0:
            vj = 0.0
        cov = qz[j] * inv_nb - ui * uj
        defined = vi > eps and vj > eps
        if nb == m:
            if not defined:
                out_d[j] = 0.0 if (vi <= eps and vj <= eps) else two_m
            else:
                q = cov / np.sqrt(vi * vj)
                if q > 1.0:
                    q = 1.0
                elif q < -1.0:
                    q = -1.0
                out_d[j] = two_m * (1.0 - q)
            out_label[j] = LABEL_COMPLETE
        elif complete_i or complete_w[j]:
            if complete_i:
                vo = vi
                inv_v = inv_full_var_i
            else:
                vo = vj
                inv_v = inv_full_var[j]
            base = nb * vo * inv_v
            if defined and cov > 0.0:
                q = cov / np.sqrt(vi * vj)
                if q > 1.0:
                    q = 1.0
                base *= 1.0 - q * q
            out_d[j] = base if base > 0.0 else 0.0
            out_label[j] = LABEL_ONE_MISSING
        else:
            f_i = vi * inv_den3_i
            f_j = vj * inv_den3[j]
            f = f_i if f_i > f_j else f_j
            base = nb * f
            if defined and cov > 0.0:
                q = cov / np.sqrt(vi * vj)
                if q > 1.0:
                    q = 1.0
                base *= 1.0 - q * q
            out_d[j] = base if base > 0.0 else 0.0
            out_label[j] = LABEL_BOTH_MISSING


@njit(cache=True, nogil=True)
def exact_distance_row(qz, m, mu, inv_sigma, const_w,
                       mu_i, inv_sigma_i, const_i, out_d):
    """Exact squared distances from a complete anchor to complete windows."""
    two_m = 2.0 * m
    for j in range(qz.shape[0]):
        if const_i or const_w[j]:
            out_d[j] = 0.0 if (const_i and const_w[j]) else two_m
        else:
            q = (qz[j] / m - mu_i * mu[j]) * inv_sigma_i * inv_sigma[j]
            if q > 1.0:
                q = 1.0
            elif q < -1.0:
                q = -1.0
            out_d[j] = two_m * (1.0 - q)
