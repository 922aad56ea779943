"""Compiled inner loops for the time stepper.

Array layout is C-order (Nr, Nz) with the z index contiguous.  Face data:

    mr[jp, k]   r * u_r on the radial face jp (radius jp*dr), row of cell k;
                mr[0] and mr[Nr] vanish identically (axis / wall).
    uzf[j, k]   u_z on the z face below cell (j, k), periodic in k.

All kernels are pure (inputs never written) and deterministic.
"""

import numpy as np
from numba import njit

# wall closure codes for diffusion stencils
WALL_DIRICHLET = 0
WALL_NEUMANN = 1


@njit(cache=True)
def corner_interp(chi, out):
    """Average cell-centered chi (even, Dirichlet-0 wall) to cell corners.

    out has shape (Nr+1, Nz); corner (jp, k) sits at (jp*dr, k*dz).  The
    axis line uses the mirror-even ghost, the wall line is exactly zero.
    """
    Nr, Nz = chi.shape
    for k in range(Nz):
        km = k - 1 if k > 0 else Nz - 1
        out[0, k] = 0.5 * (chi[0, k] + chi[0, km])
        for jp in range(1, Nr):
            out[jp, k] = 0.25 * (chi[jp - 1, k] + chi[jp, k]
                                 + chi[jp - 1, km] + chi[jp, km])
        out[Nr, k] = 0.0


@njit(cache=True)
def corner_interp_neumann(chi, out):
    """corner_interp with the reflected wall ghost instead of Dirichlet-0."""
    Nr, Nz = chi.shape
    corner_interp(chi, out)
    for k in range(Nz):
        km = k - 1 if k > 0 else Nz - 1
        out[Nr, k] = 0.5 * (chi[Nr - 1, k] + chi[Nr - 1, km])


@njit(cache=True)
def staggered_velocity(psic, r, dr, dz, mr, uzf):
    """Face velocities from the corner stream function.

    mr = r*u_r = -(psic[jp,k+1] - psic[jp,k]) / dz    at radial faces,
    uzf =        (psic[j+1,k] - psic[j,k]) / (r_j dr) at z faces,

    which makes the discrete cylindrical divergence telescope over the
    corner values.
    """
    Nrp1, Nz = psic.shape
    Nr = Nrp1 - 1
    for jp in range(Nrp1):
        for k in range(Nz):
            kp = k + 1 if k + 1 < Nz else 0
            mr[jp, k] = -(psic[jp, kp] - psic[jp, k]) / dz
    for j in range(Nr):
        w = 1.0 / (r[j] * dr)
        for k in range(Nz):
            uzf[j, k] = (psic[j + 1, k] - psic[j, k]) * w


@njit(cache=True)
def divergence(mr, uzf, r, dr, dz, out):
    """(1/(r dr)) Delta_r(r u_r) + Delta_z(u_z)/dz at cell centers."""
    Nr, Nz = out.shape
    for j in range(Nr):
        w = 1.0 / (r[j] * dr)
        for k in range(Nz):
            kp = k + 1 if k + 1 < Nz else 0
            out[j, k] = (mr[j + 1, k] - mr[j, k]) * w + (uzf[j, kp] - uzf[j, k]) / dz


@njit(cache=True)
def center_velocity(mr, uzf, dr, ur_c, uz_c):
    """Average face velocities to cell centers (u_r = mr / r_face; the axis
    face carries zero flux and zero velocity)."""
    Nr, Nz = ur_c.shape
    for j in range(Nr):
        for k in range(Nz):
            kp = k + 1 if k + 1 < Nz else 0
            left = 0.0 if j == 0 else mr[j, k] / (j * dr)
            right = mr[j + 1, k] / ((j + 1) * dr)
            ur_c[j, k] = 0.5 * (left + right)
            uz_c[j, k] = 0.5 * (uzf[j, k] + uzf[j, kp])


@njit(cache=True)
def advect(f, mr, uzf, r, dr, dz, upwind, out):
    """Flux-form advection tendency -div(u f).

    Face values are centered (upwind=False) or donor-cell (upwind=True).
    Radial fluxes at the axis and wall vanish with mr; z is periodic.
    """
    Nr, Nz = f.shape
    fr = np.empty((Nr + 1, Nz))
    fz = np.empty((Nr, Nz))
    for k in range(Nz):
        fr[0, k] = 0.0
        fr[Nr, k] = 0.0
    if upwind:
        for jp in range(1, Nr):
            for k in range(Nz):
                m = mr[jp, k]
                fr[jp, k] = m * (f[jp - 1, k] if m >= 0.0 else f[jp, k])
        for j in range(Nr):
            for k in range(Nz):
                km = k - 1 if k > 0 else Nz - 1
                u = uzf[j, k]
                fz[j, k] = u * (f[j, km] if u >= 0.0 else f[j, k])
    else:
        for jp in range(1, Nr):
            for k in range(Nz):
                fr[jp, k] = mr[jp, k] * 0.5 * (f[jp - 1, k] + f[jp, k])
        for j in range(Nr):
            for k in range(Nz):
                km = k - 1 if k > 0 else Nz - 1
                fz[j, k] = uzf[j, k] * 0.5 * (f[j, km] + f[j, k])
    for j in range(Nr):
        w = 1.0 / (r[j] * dr)
        for k in range(Nz):
            kp = k + 1 if k + 1 < Nz else 0
            out[j, k] = -((fr[j + 1, k] - fr[j, k]) * w + (fz[j, kp] - fz[j, k]) / dz)


@njit(cache=True)
def second_order_op(f, r, dr, dz, alpha, wall, out):
    """d_rr + (alpha/r) d_r + d_zz with mirror-even axis ghost.

    wall selects the r=R ghost: WALL_DIRICHLET -> -f, WALL_NEUMANN -> +f
    (zero-flux closure).  Used for the evolution of the even fields.
    """
    Nr, Nz = f.shape
    idr2 = 1.0 / (dr * dr)
    idz2 = 1.0 / (dz * dz)
    for j in range(Nr):
        cplus = idr2 + 0.5 * alpha / (r[j] * dr)
        cminus = idr2 - 0.5 * alpha / (r[j] * dr)
        for k in range(Nz):
            kp = k + 1 if k + 1 < Nz else 0
            km = k - 1 if k > 0 else Nz - 1
            fm = f[j - 1, k] if j > 0 else f[0, k]
            if j + 1 < Nr:
                fp = f[j + 1, k]
            else:
                fp = -f[Nr - 1, k] if wall == WALL_DIRICHLET else f[Nr - 1, k]
            out[j, k] = (cplus * fp + cminus * fm - 2.0 * idr2 * f[j, k]
                         + (f[j, kp] - 2.0 * f[j, k] + f[j, km]) * idz2)


@njit(cache=True)
def fused_stage(ag, ao, ah, ar, bg, bo, bh, br, mr, uzf, r, dr, dz,
                mu, upwind, src_swirl, src_mag, src_buoy, ca, cb, dt_eff,
                og, oo, oh, orh):
    """One Runge-Kutta stage for all four fields in a single pass:

        out = ca * A + cb * B + dt_eff * L(B)

    where L is the full right-hand side (flux-form advection on the
    staggered faces, the three Omega sources scaled by their toggles, and
    the diffusion terms d_minus(Gamma)*mu, d_plus(Omega)*mu, d_plus(H),
    lap_cyl(rho)).  With ca = cb = 0, dt_eff = 1 it returns the bare
    tendencies.  Face fluxes are recomputed per adjacent cell, which keeps
    the arithmetic identical to the advect kernel's flux differences.
    """
    Nr, Nz = bg.shape
    idr2 = 1.0 / (dr * dr)
    idz2 = 1.0 / (dz * dz)
    i2dz = 1.0 / (2.0 * dz)
    i2dr = 1.0 / (2.0 * dr)
    for j in range(Nr):
        rj = r[j]
        iv = 1.0 / (rj * dr)
        q_minus = idr2 - 0.5 / (rj * dr)    # lap_cyl sub
        q_plus = idr2 + 0.5 / (rj * dr)     # lap_cyl sup
        p_minus = idr2 - 1.5 / (rj * dr)    # d_plus sub
        p_plus = idr2 + 1.5 / (rj * dr)     # d_plus sup
        m_minus = idr2 + 0.5 / (rj * dr)    # d_minus sub
        m_plus = idr2 - 0.5 / (rj * dr)     # d_minus sup
        jm = j - 1
        jp = j + 1
        last = jp == Nr
        irj2 = 1.0 / (rj * rj)
        for k in range(Nz):
            kp = k + 1 if k + 1 < Nz else 0
            km = k - 1 if k > 0 else Nz - 1
            # neighbor values (axis: mirror-even; wall: Dirichlet for
            # Gamma/Omega/H, reflected for rho)
            g_c = bg[j, k]; o_c = bo[j, k]; h_c = bh[j, k]; r_c = br[j, k]
            if j == 0:
                g_m = g_c; o_m = o_c; h_m = h_c; r_m = r_c
            else:
                g_m = bg[jm, k]; o_m = bo[jm, k]; h_m = bh[jm, k]; r_m = br[jm, k]
            if last:
                g_p = -g_c; o_p = -o_c; h_p = -h_c; r_p = r_c
            else:
                g_p = bg[jp, k]; o_p = bo[jp, k]; h_p = bh[jp, k]; r_p = br[jp, k]

            # --- flux-form advection ------------------------------------
            mrl = mr[j, k]
            mrr = mr[jp, k]
            uzb = uzf[j, k]
            uzt = uzf[j, kp]
            if upwind:
                if mrl >= 0.0:
                    fg_l = g_m; fo_l = o_m; fh_l = h_m; fr_l = r_m
                else:
                    fg_l = g_c; fo_l = o_c; fh_l = h_c; fr_l = r_c
                if mrr >= 0.0:
                    fg_r = g_c; fo_r = o_c; fh_r = h_c; fr_r = r_c
                else:
                    fg_r = g_p; fo_r = o_p; fh_r = h_p; fr_r = r_p
                if uzb >= 0.0:
                    zg_b = bg[j, km]; zo_b = bo[j, km]; zh_b = bh[j, km]; zr_b = br[j, km]
                else:
                    zg_b = g_c; zo_b = o_c; zh_b = h_c; zr_b = r_c
                if uzt >= 0.0:
                    zg_t = g_c; zo_t = o_c; zh_t = h_c; zr_t = r_c
                else:
                    zg_t = bg[j, kp]; zo_t = bo[j, kp]; zh_t = bh[j, kp]; zr_t = br[j, kp]
            else:
                fg_l = 0.5 * (g_m + g_c); fo_l = 0.5 * (o_m + o_c)
                fh_l = 0.5 * (h_m + h_c); fr_l = 0.5 * (r_m + r_c)
                fg_r = 0.5 * (g_c + g_p); fo_r = 0.5 * (o_c + o_p)
                fh_r = 0.5 * (h_c + h_p); fr_r = 0.5 * (r_c + r_p)
                zg_b = 0.5 * (bg[j, km] + g_c); zo_b = 0.5 * (bo[j, km] + o_c)
                zh_b = 0.5 * (bh[j, km] + h_c); zr_b = 0.5 * (br[j, km] + r_c)
                zg_t = 0.5 * (g_c + bg[j, kp]); zo_t = 0.5 * (o_c + bo[j, kp])
                zh_t = 0.5 * (h_c + bh[j, kp]); zr_t = 0.5 * (r_c + br[j, kp])
            dg = -((mrr * fg_r - mrl * fg_l) * iv + (uzt * zg_t - uzb * zg_b) / dz)
            do = -((mrr * fo_r - mrl * fo_l) * iv + (uzt * zo_t - uzb * zo_b) / dz)
            dh = -((mrr * fh_r - mrl * fh_l) * iv + (uzt * zh_t - uzb * zh_b) / dz)
            drh = -((mrr * fr_r - mrl * fr_l) * iv + (uzt * zr_t - uzb * zr_b) / dz)

            # --- Omega sources ------------------------------------------
            if src_swirl != 0.0:
                qp = bg[j, kp] * irj2
                qm = bg[j, km] * irj2
                do += src_swirl * (qp * qp - qm * qm) * i2dz
            if src_mag != 0.0:
                hp = bh[j, kp]
                hm = bh[j, km]
                do -= src_mag * (hp * hp - hm * hm) * i2dz
            if src_buoy != 0.0:
                if last:
                    drdr = (3.0 * (r_c - br[jm, k])
                            + (br[jm - 1, k] - br[jm, k])) * i2dr
                else:
                    drdr = (r_p - r_m) * i2dr
                do -= src_buoy * drdr / rj

            # --- diffusion ----------------------------------------------
            zz_h = (bh[j, kp] - 2.0 * h_c + bh[j, km]) * idz2
            zz_r = (br[j, kp] - 2.0 * r_c + br[j, km]) * idz2
            dh += p_plus * h_p + p_minus * h_m - 2.0 * idr2 * h_c + zz_h
            drh += q_plus * r_p + q_minus * r_m - 2.0 * idr2 * r_c + zz_r
            if mu > 0.0:
                zz_g = (bg[j, kp] - 2.0 * g_c + bg[j, km]) * idz2
                zz_o = (bo[j, kp] - 2.0 * o_c + bo[j, km]) * idz2
                dg += mu * (m_plus * g_p + m_minus * g_m - 2.0 * idr2 * g_c + zz_g)
                do += mu * (p_plus * o_p + p_minus * o_m - 2.0 * idr2 * o_c + zz_o)

            og[j, k] = ca * ag[j, k] + cb * g_c + dt_eff * dg
            oo[j, k] = ca * ao[j, k] + cb * o_c + dt_eff * do
            oh[j, k] = ca * ah[j, k] + cb * h_c + dt_eff * dh
            orh[j, k] = ca * ar[j, k] + cb * r_c + dt_eff * drh


@njit(cache=True)
def tridiag_factor(sub, diag, sup, lam, cp, inv_den):
    """LU sweep of the per-mode tridiagonal systems diag + lam[m] on the
    diagonal; stores the superdiagonal multipliers and inverse pivots."""
    n = diag.shape[0]
    M = lam.shape[0]
    for m in range(M):
        den = diag[0] + lam[m]
        inv_den[0, m] = 1.0 / den
        cp[0, m] = sup[0] * inv_den[0, m]
        for j in range(1, n):
            den = diag[j] + lam[m] - sub[j] * cp[j - 1, m]
            inv_den[j, m] = 1.0 / den
            cp[j, m] = sup[j] * inv_den[j, m]


@njit(cache=True)
def tridiag_solve(sub, cp, inv_den, rhs, x):
    """Solve the factored systems for complex right-hand sides (Nr, M)."""
    n, M = rhs.shape
    for m in range(M):
        x[0, m] = rhs[0, m] * inv_den[0, m]
    for j in range(1, n):
        for m in range(M):
            x[j, m] = (rhs[j, m] - sub[j] * x[j - 1, m]) * inv_den[j, m]
    for j in range(n - 2, -1, -1):
        for m in range(M):
            x[j, m] = x[j, m] - cp[j, m] * x[j + 1, m]
