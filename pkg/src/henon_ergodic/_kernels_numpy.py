"""Vectorized numpy fallbacks for the loop kernels.

Semantics mirror ``_kernels_loop`` per point and per step (same update
order, same formulas), so the two backends agree to rounding.
"""

import numpy as np

from ._kernels_loop import (RUNNING, DONE_CERT, DONE_FAST, FAILED,
                            LOG_SWITCH, TINY, LOG_TINY)


def _apply_composite(px, py, coeffs_t, degs, avals_t, inverse):
    m = degs.shape[0]
    if inverse:
        for j in range(m - 1, -1, -1):
            deg = int(degs[j])
            acc = np.full_like(px, coeffs_t[j, deg])
            for q in range(deg - 1, -1, -1):
                acc = acc * px + coeffs_t[j, q]
            nx = (acc - py) / avals_t[j]
            py = px
            px = nx
    else:
        for j in range(m):
            deg = int(degs[j])
            acc = np.full_like(py, coeffs_t[j, deg])
            for q in range(deg - 1, -1, -1):
                acc = acc * py + coeffs_t[j, q]
            ny = acc - avals_t[j] * px
            px = py
            py = ny
    return px, py


def _apply_composite_log(plx, ply, degs, avals_t, inverse):
    m = degs.shape[0]
    if inverse:
        for j in range(m - 1, -1, -1):
            tlx = degs[j] * plx - np.log(np.abs(avals_t[j]))
            ply = plx
            plx = tlx
    else:
        for j in range(m):
            tly = degs[j] * ply
            plx = ply
            ply = tly
    return plx, ply


def green_steps(x, y, lx, ly, logmode, step, entered_at, escaped_at, status,
                value, err, coeffs, degs, avals, inverse, d_total, radius,
                esc_radius, step_bound, tail_s, tol, max_steps):
    nsteps = coeffs.shape[0]
    dd = float(d_total)
    geo = dd / (dd - 1.0)
    act = np.flatnonzero(status == RUNNING)
    for t in range(nsteps):
        if act.size == 0:
            return
        i = int(step[act[0]])
        px = x[act]
        py = y[act]
        plx = lx[act]
        ply = ly[act]
        lm = logmode[act].astype(bool)
        ax = np.abs(px)
        ay = np.abs(py)
        if inverse:
            u, w = ax, ay
        else:
            u, w = ay, ax
        in_box = (ax <= radius) & (ay <= radius) & ~lm
        in_esc = ((u > w) & (u > radius) & ~lm) | lm
        mag = np.maximum(ax, ay)
        with np.errstate(divide="ignore"):
            lmag = np.where(
                lm, np.maximum(plx, ply),
                np.where(mag > 1.0, np.log(np.maximum(mag, TINY)), 0.0))
        esc = escaped_at[act]
        new_esc = in_esc & (esc < 0)
        if new_esc.any():
            escaped_at[act[new_esc]] = i
        ent = entered_at[act]
        new_ent = (ent < 0) & (in_box | in_esc)
        if new_ent.any():
            entered_at[act[new_ent]] = i
            ent = entered_at[act]
        dpi = dd ** (-float(i))
        stop_cert = (ent >= 0) & (step_bound * dpi * geo <= tol)
        ctail = np.full(act.shape, np.inf)
        near = ~lm & in_esc & (u > esc_radius)
        if near.any():
            ctail[near] = np.log1p(tail_s / u[near])
        if lm.any():
            lu = plx if inverse else ply
            ctail[lm] = tail_s * np.exp(-np.minimum(lu[lm], 700.0))
        stop_fast = in_esc & (ctail * dpi * geo <= tol) & ~stop_cert
        stop = stop_cert | stop_fast
        if stop.any():
            idx = act[stop]
            value[idx] = dpi * lmag[stop]
            err[idx] = np.where(stop_cert[stop], step_bound * dpi * geo,
                                (ctail * dpi * geo)[stop])
            status[idx] = np.where(stop_cert[stop], DONE_CERT, DONE_FAST)
        cont = ~stop
        if i >= max_steps:
            idx = act[cont]
            status[idx] = FAILED
            step[idx] = i
            return
        idx = act[cont]
        if idx.size == 0:
            act = idx
            continue
        px = px[cont]
        py = py[cont]
        plx = plx[cont]
        ply = ply[cont]
        lm = lm[cont]
        mag = mag[cont]
        switch = ~lm & (mag > LOG_SWITCH)
        if switch.any():
            axs = np.abs(px[switch])
            ays = np.abs(py[switch])
            with np.errstate(divide="ignore"):
                plx[switch] = np.where(axs > TINY,
                                       np.log(np.maximum(axs, TINY)), LOG_TINY)
                ply[switch] = np.where(ays > TINY,
                                       np.log(np.maximum(ays, TINY)), LOG_TINY)
            lm = lm | switch
        ex = ~lm
        if ex.any():
            nx, ny = _apply_composite(px[ex], py[ex], coeffs[t], degs,
                                      avals[t], inverse)
            px[ex] = nx
            py[ex] = ny
        if lm.any():
            nlx, nly = _apply_composite_log(plx[lm], ply[lm], degs, avals[t],
                                            inverse)
            plx[lm] = nlx
            ply[lm] = nly
        x[idx] = px
        y[idx] = py
        lx[idx] = plx
        ly[idx] = ply
        logmode[idx] = lm.astype(np.uint8)
        step[idx] = i + 1
        act = idx


def classify_steps(x, y, coeffs, degs, avals, inverse, radius, n_max,
                   esc_step, ok):
    esc_step[:] = -1
    ok[:] = 1
    act = np.arange(x.shape[0])
    px = x.copy()
    py = y.copy()
    for i in range(n_max + 1):
        if act.size == 0:
            return
        ax = np.abs(px)
        ay = np.abs(py)
        bad = ~(np.isfinite(ax) & np.isfinite(ay))
        if bad.any():
            ok[act[bad]] = 0
        if inverse:
            u, w = ax, ay
        else:
            u, w = ay, ax
        hit = (u > w) & (u > radius) & ~bad
        if hit.any():
            esc_step[act[hit]] = i
        cont = ~hit & ~bad
        act = act[cont]
        px = px[cont]
        py = py[cont]
        if i == n_max or act.size == 0:
            return
        with np.errstate(over="ignore", invalid="ignore"):
            px, py = _apply_composite(px, py, coeffs[i], degs, avals[i],
                                      inverse)


def orbit_final(x, y, lx, ly, logmode, coeffs, degs, avals, inverse):
    nsteps = coeffs.shape[0]
    for t in range(nsteps):
        lm = logmode.astype(bool)
        mag = np.maximum(np.abs(x), np.abs(y))
        switch = ~lm & (mag > LOG_SWITCH)
        if switch.any():
            axs = np.abs(x[switch])
            ays = np.abs(y[switch])
            with np.errstate(divide="ignore"):
                lx[switch] = np.where(axs > TINY,
                                      np.log(np.maximum(axs, TINY)), LOG_TINY)
                ly[switch] = np.where(ays > TINY,
                                      np.log(np.maximum(ays, TINY)), LOG_TINY)
            lm = lm | switch
            logmode[:] = lm.astype(np.uint8)
        ex = ~lm
        if ex.any():
            nx, ny = _apply_composite(x[ex], y[ex], coeffs[t], degs, avals[t],
                                      inverse)
            x[ex] = nx
            y[ex] = ny
        if lm.any():
            nlx, nly = _apply_composite_log(lx[lm], ly[lm], degs, avals[t],
                                            inverse)
            lx[lm] = nlx
            ly[lm] = nly


def bowen_greedy(orb, base_orb, eps2, kept_idx):
    ncand = orb.shape[0]
    nbase = base_orb.shape[2]
    count = 0
    for c in range(ncand):
        if count:
            kept = kept_idx[:count]
            d2 = ((orb[c][None, :, :] - orb[kept]) ** 2).sum(axis=2)
            if nbase:
                b2 = ((base_orb[c][None, :, :] - base_orb[kept]) ** 2).sum(axis=2)
                d2 = np.maximum(d2, b2)
            if d2.max(axis=1).min() < eps2:
                continue
        kept_idx[count] = c
        count += 1
    return count
