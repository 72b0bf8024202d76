"""Pure-Python Monte-Carlo sweep kernel.

Same contract as the compiled extension ``dimertrap._mc_kernel``; the driver
feeds pre-generated random streams, so both backends walk identical chains.
Spins are +-1 (node 1 -> +1, node 2 -> -1); ``eta`` arrays are the influence
coefficients already rescaled to unit-spin charges.

Phi = sum_{k >= k'} (s_k - s'_k) (eta_{k-k'} s_{k'} - conj(eta_{k-k'}) s'_{k'})
over slices 0..P-1; the endpoint spin enters only through the propagators.
"""

import math

_TINY = 1e-300


def compute_phi(f, b, eta_re, eta_im, P):
    """Influence phase of the current path, from scratch. Returns (re, im)."""
    pre = 0.0
    pim = 0.0
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
    return pre, pim


def propagator_product(f, b, k_re, k_im, P):
    """prod_k K(f[k+1], f[k]) * conj(K(b[k+1], b[k])). Returns (re, im)."""
    wr = 1.0
    wi = 0.0
    for k in range(P):
        ar = k_re[f[k + 1]][f[k]]
        ai = k_im[f[k + 1]][f[k]]
        wr, wi = wr * ar - wi * ai, wr * ai + wi * ar
    for k in range(P):
        ar = k_re[b[k + 1]][b[k]]
        ai = -k_im[b[k + 1]][b[k]]
        wr, wi = wr * ar - wi * ai, wr * ai + wi * ar
    return wr, wi


def _delta_phi(f, b, j, on_backward, eta_re, eta_im, P):
    """Phase change for flipping slice j on the forward or backward string."""
    sj = 1 - 2 * f[j]
    spj = 1 - 2 * b[j]
    if on_backward:
        c1 = 2 * spj  # change of (s_j - s'_j)
    else:
        c1 = -2 * sj
    dre = 0.0
    dim = 0.0
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
    # diagonal pair (k = k' = j): value is 2 Re(eta_0) (1 - s_j s'_j)
    dre += 4.0 * eta_re[0] * sj * spj
    return dre, dim


def run_chunk(
    f,
    b,
    kf_re,
    kf_im,
    k0_re,
    k0_im,
    kabs,
    eta_re,
    eta_im,
    moves,
    unifs,
    phi,
    accum,
    bins,
    P,
):
    """Run len(bins) sweeps; one move per entry of ``moves``/``unifs``.

    ``bins[s]`` < 0 means burn-in (no measurement); otherwise it indexes a row
    of ``accum`` with columns (n1r, n1i, n2r, n2i, den_r, den_i, sgn_r, sgn_i,
    count). Returns the number of accepted moves.
    """
    n_interior = P - 1
    n_moves_per_sweep = 3 * n_interior + 1
    phi_re = phi[0]
    phi_im = phi[1]
    accepted = 0
    idx = 0
    for s in range(len(bins)):
        for _ in range(n_moves_per_sweep):
            u = moves[idx]
            r = unifs[idx]
            idx += 1
            if u < n_interior:
                j = u + 1
                old = f[j]
                new = 1 - old
                rr = (kabs[f[j + 1]][new] * kabs[new][f[j - 1]]) / (
                    kabs[f[j + 1]][old] * kabs[old][f[j - 1]]
                )
                dre, dim = _delta_phi(f, b, j, False, eta_re, eta_im, P)
                if r < rr * math.exp(-dre):
                    f[j] = new
                    phi_re += dre
                    phi_im += dim
                    accepted += 1
            elif u < 2 * n_interior:
                j = u - n_interior + 1
                old = b[j]
                new = 1 - old
                rr = (kabs[b[j + 1]][new] * kabs[new][b[j - 1]]) / (
                    kabs[b[j + 1]][old] * kabs[old][b[j - 1]]
                )
                dre, dim = _delta_phi(f, b, j, True, eta_re, eta_im, P)
                if r < rr * math.exp(-dre):
                    b[j] = new
                    phi_re += dre
                    phi_im += dim
                    accepted += 1
            elif u < 3 * n_interior:
                # joint flip of both strings at slice j: the only ergodic
                # channel between diagonal path sectors at strong coupling,
                # where intermediate single-string blips are suppressed
                j = u - 2 * n_interior + 1
                of = f[j]
                nf = 1 - of
                ob = b[j]
                nb = 1 - ob
                rr = (kabs[f[j + 1]][nf] * kabs[nf][f[j - 1]]) / (
                    kabs[f[j + 1]][of] * kabs[of][f[j - 1]]
                )
                rr *= (kabs[b[j + 1]][nb] * kabs[nb][b[j - 1]]) / (
                    kabs[b[j + 1]][ob] * kabs[ob][b[j - 1]]
                )
                d1re, d1im = _delta_phi(f, b, j, False, eta_re, eta_im, P)
                f[j] = nf
                d2re, d2im = _delta_phi(f, b, j, True, eta_re, eta_im, P)
                f[j] = of
                dre = d1re + d2re
                dim = d1im + d2im
                if r < rr * math.exp(-dre):
                    f[j] = nf
                    b[j] = nb
                    phi_re += dre
                    phi_im += dim
                    accepted += 1
            else:
                old = f[P]
                new = 1 - old
                rr = (kabs[new][f[P - 1]] * kabs[new][b[P - 1]]) / (
                    kabs[old][f[P - 1]] * kabs[old][b[P - 1]]
                )
                if r < rr:
                    f[P] = new
                    b[P] = new
                    accepted += 1
        bn = bins[s]
        if bn >= 0:
            wr, wi = propagator_product(f, b, kf_re, kf_im, P)
            zr, zi = propagator_product(f, b, k0_re, k0_im, P)
            damp = math.exp(-phi_re)
            cp = math.cos(phi_im)
            sp = math.sin(phi_im)
            # W = (wr + i wi) * damp * (cp - i sp); same bath factor for W0
            w_re = damp * (wr * cp + wi * sp)
            w_im = damp * (wi * cp - wr * sp)
            z_re = damp * (zr * cp + zi * sp)
            z_im = damp * (zi * cp - zr * sp)
            amag = math.sqrt(w_re * w_re + w_im * w_im)
            if amag < _TINY:
                amag = _TINY
            s_re = w_re / amag
            s_im = w_im / amag
            row = accum[bn]
            if f[P] == 0:
                row[0] += s_re
                row[1] += s_im
            else:
                row[2] += s_re
                row[3] += s_im
            row[4] += z_re / amag
            row[5] += z_im / amag
            row[6] += s_re
            row[7] += s_im
            row[8] += 1.0
    phi[0] = phi_re
    phi[1] = phi_im
    return accepted
