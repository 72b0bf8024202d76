# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte-Carlo sweep kernel.

Mirrors ``dimertrap._mc_fallback`` operation for operation so that both
backends produce bit-identical chains from the same random streams.
"""

from libc.math cimport cos, exp, sin, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF TINY = 1e-300


cdef void _phi_scratch(signed char[::1] f, signed char[::1] b,
                       double[::1] eta_re, double[::1] eta_im,
                       Py_ssize_t P, double* out_re, double* out_im) nogil:
    cdef double pre = 0.0, pim = 0.0
    cdef Py_ssize_t k, kp
    cdef int sk, spk, x, s2, sp2
    cdef double er, ei
    for k in range(P):
        sk = 1 - 2 * f[k]
        spk = 1 - 2 * b[k]
        x = sk - spk
        if x == 0:
            continue
        for kp in range(k + 1):
            s2 = 1 - 2 * f[kp]
            sp2 = 1 - 2 * b[kp]
            er = eta_re[k - kp]
            ei = eta_im[k - kp]
            pre += x * (er * (s2 - sp2))
            pim += x * (ei * (s2 + sp2))
    out_re[0] = pre
    out_im[0] = pim


def compute_phi(signed char[::1] f, signed char[::1] b,
                double[::1] eta_re, double[::1] eta_im, Py_ssize_t P):
    """Influence phase of the current path, from scratch. Returns (re, im)."""
    cdef double pre, pim
    _phi_scratch(f, b, eta_re, eta_im, P, &pre, &pim)
    return pre, pim


cdef void _prop_product(signed char[::1] f, signed char[::1] b,
                        double[:, ::1] k_re, double[:, ::1] k_im,
                        Py_ssize_t P, double* out_re, double* out_im) nogil:
    cdef double wr = 1.0, wi = 0.0, ar, ai, tr
    cdef Py_ssize_t k
    for k in range(P):
        ar = k_re[f[k + 1], f[k]]
        ai = k_im[f[k + 1], f[k]]
        tr = wr * ar - wi * ai
        wi = wr * ai + wi * ar
        wr = tr
    for k in range(P):
        ar = k_re[b[k + 1], b[k]]
        ai = -k_im[b[k + 1], b[k]]
        tr = wr * ar - wi * ai
        wi = wr * ai + wi * ar
        wr = tr
    out_re[0] = wr
    out_im[0] = wi


def propagator_product(signed char[::1] f, signed char[::1] b,
                       double[:, ::1] k_re, double[:, ::1] k_im, Py_ssize_t P):
    """prod_k K(f[k+1], f[k]) * conj(K(b[k+1], b[k])). Returns (re, im)."""
    cdef double wr, wi
    _prop_product(f, b, k_re, k_im, P, &wr, &wi)
    return wr, wi


cdef void _delta_phi(signed char[::1] f, signed char[::1] b, Py_ssize_t j,
                     bint on_backward, double[::1] eta_re, double[::1] eta_im,
                     Py_ssize_t P, double* out_re, double* out_im) nogil:
    cdef int sj = 1 - 2 * f[j]
    cdef int spj = 1 - 2 * b[j]
    cdef int c1, x, s2, sp2
    cdef double dre = 0.0, dim = 0.0, er, ei
    cdef Py_ssize_t kp, k
    if on_backward:
        c1 = 2 * spj
    else:
        c1 = -2 * sj
    for kp in range(j):
        s2 = 1 - 2 * f[kp]
        sp2 = 1 - 2 * b[kp]
        er = eta_re[j - kp]
        ei = eta_im[j - kp]
        dre += c1 * (er * (s2 - sp2))
        dim += c1 * (ei * (s2 + sp2))
    for k in range(j + 1, P):
        x = (1 - 2 * f[k]) - (1 - 2 * b[k])
        if x == 0:
            continue
        er = eta_re[k - j]
        ei = eta_im[k - j]
        if on_backward:
            dre += x * (-er) * (-2 * spj)
            dim += x * ei * (-2 * spj)
        else:
            dre += x * er * (-2 * sj)
            dim += x * ei * (-2 * sj)
    dre += 4.0 * eta_re[0] * sj * spj
    out_re[0] = dre
    out_im[0] = dim


def run_chunk(signed char[::1] f, signed char[::1] b,
              double[:, ::1] kf_re, double[:, ::1] kf_im,
              double[:, ::1] k0_re, double[:, ::1] k0_im,
              double[:, ::1] kabs,
              double[::1] eta_re, double[::1] eta_im,
              long long[::1] moves, double[::1] unifs,
              double[::1] phi, double[:, ::1] accum, long long[::1] bins,
              Py_ssize_t P):
    """Run len(bins) sweeps; identical contract to the fallback kernel."""
    cdef Py_ssize_t n_interior = P - 1
    cdef Py_ssize_t n_moves = 3 * n_interior + 1
    cdef double phi_re = phi[0]
    cdef double phi_im = phi[1]
    cdef long long accepted = 0
    cdef Py_ssize_t idx = 0, s, m, j, bn
    cdef long long u
    cdef double r, rr, dre, dim, d1re, d1im, d2re, d2im
    cdef int old, new, of, nf, ob, nb
    cdef double wr, wi, zr, zi, damp, cp, sp, w_re, w_im, z_re, z_im, amag, s_re, s_im
    with nogil:
        for s in range(bins.shape[0]):
            for m in range(n_moves):
                u = moves[idx]
                r = unifs[idx]
                idx += 1
                if u < n_interior:
                    j = u + 1
                    old = f[j]
                    new = 1 - old
                    rr = (kabs[f[j + 1], new] * kabs[new, f[j - 1]]) / (
                        kabs[f[j + 1], old] * kabs[old, f[j - 1]]
                    )
                    _delta_phi(f, b, j, False, eta_re, eta_im, P, &dre, &dim)
                    if r < rr * exp(-dre):
                        f[j] = <signed char> new
                        phi_re += dre
                        phi_im += dim
                        accepted += 1
                elif u < 2 * n_interior:
                    j = u - n_interior + 1
                    old = b[j]
                    new = 1 - old
                    rr = (kabs[b[j + 1], new] * kabs[new, b[j - 1]]) / (
                        kabs[b[j + 1], old] * kabs[old, b[j - 1]]
                    )
                    _delta_phi(f, b, j, True, eta_re, eta_im, P, &dre, &dim)
                    if r < rr * exp(-dre):
                        b[j] = <signed char> new
                        phi_re += dre
                        phi_im += dim
                        accepted += 1
                elif u < 3 * n_interior:
                    # joint flip of both strings at slice j (ergodicity at
                    # strong coupling, where single-string blips are frozen)
                    j = u - 2 * n_interior + 1
                    of = f[j]
                    nf = 1 - of
                    ob = b[j]
                    nb = 1 - ob
                    rr = (kabs[f[j + 1], nf] * kabs[nf, f[j - 1]]) / (
                        kabs[f[j + 1], of] * kabs[of, f[j - 1]]
                    )
                    rr = rr * (kabs[b[j + 1], nb] * kabs[nb, b[j - 1]]) / (
                        kabs[b[j + 1], ob] * kabs[ob, b[j - 1]]
                    )
                    _delta_phi(f, b, j, False, eta_re, eta_im, P, &d1re, &d1im)
                    f[j] = <signed char> nf
                    _delta_phi(f, b, j, True, eta_re, eta_im, P, &d2re, &d2im)
                    f[j] = <signed char> of
                    dre = d1re + d2re
                    dim = d1im + d2im
                    if r < rr * exp(-dre):
                        f[j] = <signed char> nf
                        b[j] = <signed char> nb
                        phi_re += dre
                        phi_im += dim
                        accepted += 1
                else:
                    old = f[P]
                    new = 1 - old
                    rr = (kabs[new, f[P - 1]] * kabs[new, b[P - 1]]) / (
                        kabs[old, f[P - 1]] * kabs[old, b[P - 1]]
                    )
                    if r < rr:
                        f[P] = <signed char> new
                        b[P] = <signed char> new
                        accepted += 1
            bn = bins[s]
            if bn >= 0:
                _prop_product(f, b, kf_re, kf_im, P, &wr, &wi)
                _prop_product(f, b, k0_re, k0_im, P, &zr, &zi)
                damp = exp(-phi_re)
                cp = cos(phi_im)
                sp = sin(phi_im)
                w_re = damp * (wr * cp + wi * sp)
                w_im = damp * (wi * cp - wr * sp)
                z_re = damp * (zr * cp + zi * sp)
                z_im = damp * (zi * cp - zr * sp)
                amag = sqrt(w_re * w_re + w_im * w_im)
                if amag < TINY:
                    amag = TINY
                s_re = w_re / amag
                s_im = w_im / amag
                if f[P] == 0:
                    accum[bn, 0] += s_re
                    accum[bn, 1] += s_im
                else:
                    accum[bn, 2] += s_re
                    accum[bn, 3] += s_im
                accum[bn, 4] += z_re / amag
                accum[bn, 5] += z_im / amag
                accum[bn, 6] += s_re
                accum[bn, 7] += s_im
                accum[bn, 8] += 1.0
    phi[0] = phi_re
    phi[1] = phi_im
    return accepted
