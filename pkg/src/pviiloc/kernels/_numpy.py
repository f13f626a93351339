"""Pure-numpy twin of :mod:`pviiloc.kernels._numba`.

Same algorithms and return conventions; loops over the sample are replaced
by array expressions, loops over intervals and replicates stay in Python.
"""

import math

import numpy as np

STATUS_OK = 0
STATUS_RESOLUTION = 1
STATUS_ENDPOINT = 2
STATUS_STACK = 3

_EPS = np.finfo(float).eps
_TINY = 1e-300
_STACK = 1024
_BIG = 1e150
_CURV_WIDTH = 1.0
_R3 = math.sqrt(3.0)
_P1 = math.sqrt(2.0) - 1.0
_P2 = math.sqrt(2.0) + 1.0
_K1 = 1.4571067811865475
_K2 = 0.04289321881345243


def _w(u):
    return 1.0 / (1.0 + u * u)


def loss(x, t):
    a = np.abs(x - t)
    big = a > _BIG
    if big.any():
        vals = np.where(big, 2.0 * np.log(np.where(big, a, 1.0)), np.log1p(np.where(big, 0.0, a) ** 2))
        return float(vals.mean())
    return float(np.log1p(a * a).mean())


def score(x, t):
    u = x - t
    return float((u * _w(u)).mean())


def score_slope(x, t):
    w = _w(x - t)
    return float(((1.0 - 2.0 * w) * w).mean())


def score_curvature(x, t):
    u = x - t
    w = _w(u)
    return float((2.0 * u * w * (1.0 - 4.0 * w) * w).mean())


def _pair(x, t, order):
    u = x - t
    w = _w(u)
    g = (1.0 - 2.0 * w) * w
    if order == 0:
        return float((u * w).mean()), float(g.mean())
    return float(g.mean()), float((2.0 * u * w * (1.0 - 4.0 * w) * w).mean())


def _enclose(x, a, b):
    ul = x - b
    uh = x - a
    wl = _w(ul)
    wh = _w(uh)
    dl = ul * wl
    dh = uh * wh
    lo = np.minimum(dl, dh)
    hi = np.maximum(dl, dh)
    hi = np.where((ul <= 1.0) & (uh >= 1.0), 0.5, hi)
    lo = np.where((ul <= -1.0) & (uh >= -1.0), -0.5, lo)
    fabs = np.maximum(-lo, hi).sum()
    fmin, fmax = lo.sum(), hi.sum()
    gl = (1.0 - 2.0 * wl) * wl
    gh = (1.0 - 2.0 * wh) * wh
    glo = np.minimum(gl, gh)
    ghi = np.maximum(gl, gh)
    glo = np.where((ul <= 0.0) & (uh >= 0.0), -1.0, glo)
    ghi = np.where(((ul <= _R3) & (uh >= _R3)) | ((ul <= -_R3) & (uh >= -_R3)), 0.125, ghi)
    gabs = np.maximum(-glo, ghi).sum()
    return dh.sum(), dl.sum(), fmin, fmax, gh.sum(), gl.sum(), glo.sum(), ghi.sum(), fabs, gabs


def _curv(u):
    w = _w(u)
    return 2.0 * u * w * (1.0 - 4.0 * w) * w


def _enclose_curvature(x, a, b):
    ul = x - b
    uh = x - a
    kl = _curv(ul)
    kh = _curv(uh)
    lo = np.minimum(kl, kh)
    hi = np.maximum(kl, kh)
    lo = np.where((ul <= _P1) & (uh >= _P1), -_K1, lo)
    hi = np.where((ul <= -_P1) & (uh >= -_P1), _K1, hi)
    hi = np.where((ul <= _P2) & (uh >= _P2), np.maximum(hi, _K2), hi)
    lo = np.where((ul <= -_P2) & (uh >= -_P2), np.minimum(lo, -_K2), lo)
    return lo.sum(), hi.sum(), np.maximum(-lo, hi).sum()


def _refine(x, a, b, fa, order):
    lo, hi = (a, b) if fa < 0.0 else (b, a)
    t = 0.5 * (a + b)
    dx_old = dx = abs(b - a)
    f, df = _pair(x, t, order)
    for _ in range(200):
        if f == 0.0:
            break
        newton = df != 0.0
        if newton:
            tn = t - f / df
            newton = (tn - lo) * (tn - hi) < 0.0 and abs(2.0 * f) <= abs(dx_old * df)
        dx_old = dx
        if newton:
            dx = f / df
            t = tn
        else:
            dx = 0.5 * (hi - lo)
            t = lo + dx
        f, df = _pair(x, t, order)
        if f < 0.0:
            lo = t
        else:
            hi = t
        if abs(dx) <= max(_TINY, 4.0 * _EPS * abs(t)) or abs(hi - lo) <= 4.0 * _EPS * abs(t):
            break
    return t


def _flips(fp, fq):
    return (fp > 0.0 and fq <= 0.0) or (fp < 0.0 and fq >= 0.0)


def find_roots(x, scan_step, max_halvings):
    n = x.shape[0]
    xmin, xmax = float(x.min()), float(x.max())
    if xmin == xmax:
        return np.array([xmin]), np.array([[xmin, xmin]]), 1, STATUS_OK, 0.0, 0
    floor = scan_step / 2.0 ** max_halvings
    rel = (n + 4.0) * _EPS
    lo0, hi0 = xmin - 1.0, xmax + 1.0
    if not (score(x, lo0) > 0.0 and score(x, hi0) < 0.0):
        return np.empty(0), np.empty((0, 2)), 0, STATUS_ENDPOINT, 0.0, 0
    roots, brackets = [], []
    stack = [(lo0, hi0)]
    min_width = hi0 - lo0
    nsign = 0

    def done(status, width):
        return (np.array(roots), np.array(brackets).reshape(-1, 2), len(roots), status, width, nsign)

    while stack:
        a, b = stack.pop()
        fa, fb, fmin, fmax, ga, gb, gmin, gmax, fabs, gabs = _enclose(x, a, b)
        margin = rel * fabs
        if fmin > margin or fmax < -margin:
            continue
        margin = rel * gabs
        mode, apex = 0, a
        if not (gmax < -margin or gmin > margin):
            if b - a > _CURV_WIDTH:
                kmin, kmax, margin = -1.0, 1.0, 0.0
            else:
                kmin, kmax, kabs = _enclose_curvature(x, a, b)
                margin = rel * kabs
            if not (kmin > margin or kmax < -margin):
                mode = 2
            elif (ga > 0.0 and gb < 0.0) or (ga < 0.0 and gb > 0.0):
                mode = 1
                apex = _refine(x, a, b, ga, 1)
            elif ga == 0.0 or gb == 0.0:
                mode = 2
        if mode == 2:
            w = b - a
            c = 0.5 * (a + b)
            if c <= a or c >= b or w <= 64.0 * _EPS * max(abs(a), abs(b)):
                if _flips(fa, fb):
                    roots.append(min(max(b if abs(fb) <= abs(fa) else a, xmin), xmax))
                    brackets.append((a, b))
                nsign += 1
                continue
            if w < floor:
                # sign-only classification below the floor
                nsign += 1
                if fa == 0.0:
                    a, fa = c, score(x, c) * n
                if _flips(fa, fb):
                    t = b if fb == 0.0 else _refine(x, a, b, fa, 0)
                    roots.append(min(max(t, xmin), xmax))
                    brackets.append((a, b))
                continue
            min_width = min(min_width, w)
            if len(stack) + 2 > _STACK:
                return done(STATUS_STACK, w)
            stack.append((c, b))
            stack.append((a, c))
            continue
        if mode == 0:
            pieces = [(a, b, fa, fb)]
        else:
            fapex = score(x, apex) * n
            pieces = [(a, apex, fa, fapex), (apex, b, fapex, fb)]
        for p, q, fp, fq in pieces:
            if _flips(fp, fq):
                roots.append(min(max(q if fq == 0.0 else _refine(x, p, q, fp, 0), xmin), xmax))
                brackets.append((p, q))
    return done(STATUS_OK, min_width)


def select_global(x, roots, count, tie_tol):
    losses = np.array([loss(x, r) for r in roots[:count]])
    best = losses.min()
    med = float(np.median(x))
    pick, ntied = -1, 0
    for k in range(count):
        if losses[k] <= best + tie_tol:
            ntied += 1
            if pick < 0 or abs(roots[k] - med) < abs(roots[pick] - med) - tie_tol:
                pick = k
    return pick, ntied > 1, losses


def local_mle(x, start, max_steps):
    t = float(start)
    cur = loss(x, t)
    for it in range(max_steps):
        f, df = _pair(x, t, 0)
        step = -f / df if df < 0.0 else 2.0 * f
        if abs(step) <= max(1e-12, 4.0 * _EPS * abs(t)):
            return t, 0, it
        if df < 0.0 and abs(step) < 1e-6 * (1.0 + abs(t)):
            t += step
            cur = loss(x, t)
            continue
        lam = 1.0
        for _ in range(60):
            tn = t + lam * step
            ln = loss(x, tn)
            if ln <= cur:
                break
            lam *= 0.5
        else:
            return t, 0, it
        t, cur = tn, ln
    return t, 1, max_steps


def global_mle_batch(samples, scan_step, max_halvings, tie_tol, estimates, nroots, status):
    for r in range(samples.shape[0]):
        x = samples[r]
        roots, _, count, st, _, _ = find_roots(x, scan_step, max_halvings)
        status[r] = st
        nroots[r] = count
        if st != STATUS_OK or count % 2 == 0:
            estimates[r] = np.nan
            if st == STATUS_OK:
                status[r] = STATUS_RESOLUTION
            continue
        k, _, _ = select_global(x, roots, count, tie_tol)
        estimates[r] = roots[k]


def local_mle_batch(samples, max_steps, estimates, status):
    for r in range(samples.shape[0]):
        x = samples[r]
        t, st, _ = local_mle(x, np.median(x), max_steps)
        estimates[r] = t
        status[r] = st
