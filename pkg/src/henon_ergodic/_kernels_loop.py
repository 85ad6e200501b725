"""Scalar-loop kernels.

These are written as plain-python loops so numba can compile them in
nopython mode; the numpy backend provides vectorized equivalents with the
same per-point operation order (see ``_kernels_numpy``).

Shared state convention for orbit iteration: a point carries complex
coordinates ``(x, y)`` while they fit comfortably in doubles and switches to
log-magnitude coordinates ``(lx, ly)`` once ``max(|x|,|y|) > LOG_SWITCH``,
so deeply escaping orbits never overflow.  In log mode only the monic top
term of each factor is kept; the dropped corrections are covered by the
analytic tail bound used at the stopping test.

Step-data packing: ``coeffs[t, j, :deg_j+1]`` are the ascending coefficients
of factor ``j`` of the composite applied at orbit step ``t`` (leading
coefficient stored explicitly, equal to 1), ``avals[t, j]`` the matching
inversion coefficients, ``degs[j]`` the factor degrees (constant over
steps).  ``inverse=True`` applies the inverse composite: reversed factor
order, factor-inverse formula.
"""

import math

RUNNING = 0
DONE_CERT = 1
DONE_FAST = 2
FAILED = 3

LOG_SWITCH = 1.0e9
TINY = 1.0e-300
LOG_TINY = math.log(TINY)


def green_steps(x, y, lx, ly, logmode, step, entered_at, escaped_at, status,
                value, err, coeffs, degs, avals, inverse, d_total, radius,
                esc_radius, step_bound, tail_s, tol, max_steps):
    """Advance the certified Green estimator by up to ``coeffs.shape[0]`` steps.

    Stops a point either on the certified filtration tail
    ``step_bound * d^-i * d/(d-1) <= tol`` (once the orbit has entered the
    absorbing region) or on the escape fast path (inside the escape cone
    beyond ``esc_radius`` with analytic tail below ``tol``).  Points still
    running on return need another chunk of step data.
    """
    npts = x.shape[0]
    nsteps = coeffs.shape[0]
    m = coeffs.shape[1]
    dd = float(d_total)
    geo = dd / (dd - 1.0)
    for p in range(npts):
        if status[p] != RUNNING:
            continue
        px = x[p]
        py = y[p]
        plx = lx[p]
        ply = ly[p]
        lm = logmode[p]
        i = step[p]
        ent = entered_at[p]
        esc = escaped_at[p]
        for t in range(nsteps):
            # evaluate stopping rules on the current state z_i
            if lm == 0:
                ax = abs(px)
                ay = abs(py)
                if inverse:
                    u = ax
                    w = ay
                else:
                    u = ay
                    w = ax
                in_box = ax <= radius and ay <= radius
                in_esc = u > w and u > radius
                mag = ax if ax > ay else ay
                lmag = math.log(mag) if mag > 1.0 else 0.0
            else:
                in_box = False
                in_esc = True
                lmag = plx if plx > ply else ply
            if in_esc and esc < 0:
                esc = i
            if ent < 0 and (in_box or in_esc):
                ent = i
            dpi = dd ** (-float(i))
            if ent >= 0 and step_bound * dpi * geo <= tol:
                value[p] = dpi * lmag
                err[p] = step_bound * dpi * geo
                status[p] = DONE_CERT
                break
            if in_esc:
                if lm == 0:
                    if u > esc_radius:
                        ctail = math.log1p(tail_s / u)
                        e = ctail * dpi * geo
                        if e <= tol:
                            value[p] = dpi * lmag
                            err[p] = e
                            status[p] = DONE_FAST
                            break
                else:
                    lu = plx if inverse else ply
                    ctail = tail_s * math.exp(-min(lu, 700.0))
                    e = ctail * dpi * geo
                    if e <= tol:
                        value[p] = dpi * lmag
                        err[p] = e
                        status[p] = DONE_FAST
                        break
            if i >= max_steps:
                status[p] = FAILED
                break
            # switch to log-magnitude tracking before the next composite
            if lm == 0:
                mag = abs(px)
                ay = abs(py)
                if ay > mag:
                    mag = ay
                if mag > LOG_SWITCH:
                    axp = abs(px)
                    plx = math.log(axp) if axp > TINY else LOG_TINY
                    ply = math.log(ay) if ay > TINY else LOG_TINY
                    lm = 1
            # apply the composite for orbit step i+1
            if lm == 0:
                if inverse:
                    for j in range(m - 1, -1, -1):
                        deg = degs[j]
                        acc = coeffs[t, j, deg]
                        for q in range(deg - 1, -1, -1):
                            acc = acc * px + coeffs[t, j, q]
                        nx = (acc - py) / avals[t, j]
                        py = px
                        px = nx
                else:
                    for j in range(m):
                        deg = degs[j]
                        acc = coeffs[t, j, deg]
                        for q in range(deg - 1, -1, -1):
                            acc = acc * py + coeffs[t, j, q]
                        ny = acc - avals[t, j] * px
                        px = py
                        py = ny
            else:
                if inverse:
                    for j in range(m - 1, -1, -1):
                        tlx = degs[j] * plx - math.log(abs(avals[t, j]))
                        ply = plx
                        plx = tlx
                else:
                    for j in range(m):
                        tly = degs[j] * ply
                        plx = ply
                        ply = tly
            i += 1
        x[p] = px
        y[p] = py
        lx[p] = plx
        ly[p] = ply
        logmode[p] = lm
        step[p] = i
        entered_at[p] = ent
        escaped_at[p] = esc


def classify_steps(x, y, coeffs, degs, avals, inverse, radius, n_max,
                   esc_step, ok):
    """First entry step into the escape cone, or -1 within ``n_max`` steps.

    ``ok[p]`` is cleared when coordinates stop being finite before a verdict
    (undecided).  State index 0 is the input point itself.
    """
    npts = x.shape[0]
    m = coeffs.shape[1]
    for p in range(npts):
        px = x[p]
        py = y[p]
        esc_step[p] = -1
        ok[p] = 1
        for i in range(n_max + 1):
            ax = abs(px)
            ay = abs(py)
            if not (math.isfinite(ax) and math.isfinite(ay)):
                ok[p] = 0
                break
            if inverse:
                u = ax
                w = ay
            else:
                u = ay
                w = ax
            if u > w and u > radius:
                esc_step[p] = i
                break
            if i == n_max:
                break
            if inverse:
                for j in range(m - 1, -1, -1):
                    deg = degs[j]
                    acc = coeffs[i, j, deg]
                    for q in range(deg - 1, -1, -1):
                        acc = acc * px + coeffs[i, j, q]
                    nx = (acc - py) / avals[i, j]
                    py = px
                    px = nx
            else:
                for j in range(m):
                    deg = degs[j]
                    acc = coeffs[i, j, deg]
                    for q in range(deg - 1, -1, -1):
                        acc = acc * py + coeffs[i, j, q]
                    ny = acc - avals[i, j] * px
                    px = py
                    py = ny


def orbit_final(x, y, lx, ly, logmode, coeffs, degs, avals, inverse):
    """Apply exactly ``coeffs.shape[0]`` composites, log-tracking past overflow.

    On return, points with ``logmode == 0`` hold exact final coordinates;
    the rest hold log magnitudes in ``(lx, ly)``.
    """
    npts = x.shape[0]
    nsteps = coeffs.shape[0]
    m = coeffs.shape[1]
    for p in range(npts):
        px = x[p]
        py = y[p]
        plx = lx[p]
        ply = ly[p]
        lm = logmode[p]
        for t in range(nsteps):
            if lm == 0:
                ax = abs(px)
                ay = abs(py)
                mag = ax if ax > ay else ay
                if mag > LOG_SWITCH:
                    plx = math.log(ax) if ax > TINY else LOG_TINY
                    ply = math.log(ay) if ay > TINY else LOG_TINY
                    lm = 1
            if lm == 0:
                if inverse:
                    for j in range(m - 1, -1, -1):
                        deg = degs[j]
                        acc = coeffs[t, j, deg]
                        for q in range(deg - 1, -1, -1):
                            acc = acc * px + coeffs[t, j, q]
                        nx = (acc - py) / avals[t, j]
                        py = px
                        px = nx
                else:
                    for j in range(m):
                        deg = degs[j]
                        acc = coeffs[t, j, deg]
                        for q in range(deg - 1, -1, -1):
                            acc = acc * py + coeffs[t, j, q]
                        ny = acc - avals[t, j] * px
                        px = py
                        py = ny
            else:
                if inverse:
                    for j in range(m - 1, -1, -1):
                        tlx = degs[j] * plx - math.log(abs(avals[t, j]))
                        ply = plx
                        plx = tlx
                else:
                    for j in range(m):
                        tly = degs[j] * ply
                        plx = ply
                        ply = tly
        x[p] = px
        y[p] = py
        lx[p] = plx
        ly[p] = ply
        logmode[p] = lm


def bowen_greedy(orb, base_orb, eps2, kept_idx):
    """Greedy maximal eps-separated subset in the orbit sup-metric.

    ``orb[c, s, :]`` are real orbit coordinates of candidate ``c`` at step
    ``s``; ``base_orb`` adds base-orbit coordinates combined by max (pass a
    zero-width array when absent).  Candidates are scanned in input order;
    returns the number kept, indices in ``kept_idx``.
    """
    ncand = orb.shape[0]
    nsteps = orb.shape[1]
    ncoord = orb.shape[2]
    nbase = base_orb.shape[2]
    count = 0
    for c in range(ncand):
        keep = True
        for kk in range(count):
            k = kept_idx[kk]
            mx = 0.0
            for s in range(nsteps):
                dsum = 0.0
                for q in range(ncoord):
                    dv = orb[c, s, q] - orb[k, s, q]
                    dsum += dv * dv
                bsum = 0.0
                for q in range(nbase):
                    dv = base_orb[c, s, q] - base_orb[k, s, q]
                    bsum += dv * dv
                if bsum > dsum:
                    dsum = bsum
                if dsum > mx:
                    mx = dsum
                if mx >= eps2:
                    break
            if mx < eps2:
                keep = False
                break
        if keep:
            kept_idx[count] = c
            count += 1
    return count
