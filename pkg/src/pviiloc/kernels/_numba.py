"""Compiled kernels for the score equation of the Pearson VII location model.

All functions take the raw observations ``x`` (1-D float64) and work with
residuals ``u = x - t``.  With ``w = 1 / (1 + u**2)`` the kernel and its
derivatives in ``t`` are

    D        = u * w
    dD/dt    = (1 - 2 w) w
    d2D/dt2  = 2 D (1 - 4 w) w

which stay finite for arbitrarily large ``|u|`` (``w`` underflows to 0).
"""

import math

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_RESOLUTION = 1
STATUS_ENDPOINT = 2
STATUS_STACK = 3

_EPS = 2.220446049250313e-16
_TINY = 1e-300
_STACK = 1024
# log1p(u*u) overflows past this; switch to 2*log|u|.
_BIG = 1e150
# wider intervals essentially never certify a one-signed curvature
_CURV_WIDTH = 1.0


@njit(cache=True, nogil=True)
def _log1p_sq(u):
    a = abs(u)
    if a > _BIG:
        return 2.0 * math.log(a)
    return math.log1p(a * a)


@njit(cache=True, nogil=True)
def loss(x, t):
    acc = 0.0
    for i in range(x.shape[0]):
        acc += _log1p_sq(x[i] - t)
    return acc / x.shape[0]


@njit(cache=True, nogil=True)
def score(x, t):
    acc = 0.0
    for i in range(x.shape[0]):
        u = x[i] - t
        acc += u / (1.0 + u * u)
    return acc / x.shape[0]


@njit(cache=True, nogil=True)
def score_slope(x, t):
    acc = 0.0
    for i in range(x.shape[0]):
        u = x[i] - t
        w = 1.0 / (1.0 + u * u)
        acc += (1.0 - 2.0 * w) * w
    return acc / x.shape[0]


@njit(cache=True, nogil=True)
def score_curvature(x, t):
    acc = 0.0
    for i in range(x.shape[0]):
        u = x[i] - t
        w = 1.0 / (1.0 + u * u)
        acc += 2.0 * u * w * (1.0 - 4.0 * w) * w
    return acc / x.shape[0]


@njit(cache=True, nogil=True)
def _score_and_slope(x, t):
    s = 0.0
    d = 0.0
    for i in range(x.shape[0]):
        u = x[i] - t
        w = 1.0 / (1.0 + u * u)
        s += u * w
        d += (1.0 - 2.0 * w) * w
    n = x.shape[0]
    return s / n, d / n


@njit(cache=True, nogil=True)
def _slope_and_curvature(x, t):
    d = 0.0
    c = 0.0
    for i in range(x.shape[0]):
        u = x[i] - t
        w = 1.0 / (1.0 + u * u)
        d += (1.0 - 2.0 * w) * w
        c += 2.0 * u * w * (1.0 - 4.0 * w) * w
    n = x.shape[0]
    return d / n, c / n


@njit(cache=True, nogil=True)
def _pair(x, t, order):
    if order == 0:
        return _score_and_slope(x, t)
    return _slope_and_curvature(x, t)


@njit(cache=True, nogil=True)
def _curv(u):
    w = 1.0 / (1.0 + u * u)
    return 2.0 * u * w * (1.0 - 4.0 * w) * w


@njit(cache=True, nogil=True)
def _enclose_curvature(x, a, b):
    """Sum bounds of d2D/dt2 over t in [a, b].

    Interior extrema sit at u = +-(sqrt(2) - 1) and u = +-(sqrt(2) + 1).
    """
    kmin = 0.0
    kmax = 0.0
    kabs = 0.0
    p1 = 0.41421356237309503
    p2 = 2.414213562373095
    for i in range(x.shape[0]):
        ul = x[i] - b
        uh = x[i] - a
        kl = _curv(ul)
        kh = _curv(uh)
        lo = min(kl, kh)
        hi = max(kl, kh)
        if ul <= p1 and uh >= p1:
            lo = -1.4571067811865475
        if ul <= -p1 and uh >= -p1:
            hi = 1.4571067811865475
        if ul <= p2 and uh >= p2:
            hi = max(hi, 0.04289321881345243)
        if ul <= -p2 and uh >= -p2:
            lo = min(lo, -0.04289321881345243)
        kmin += lo
        kmax += hi
        kabs += max(-lo, hi)
    return kmin, kmax, kabs


@njit(cache=True, nogil=True)
def _enclose(x, a, b):
    """Sum bounds of D and dD/dt over t in [a, b].

    Returns (f(a), f(b), fmin, fmax, g(a), g(b), gmin, gmax, fabs, gabs) as
    *sums* over the sample, with fabs and gabs the sums of term magnitudes
    (they scale the rounding margin),
    where f is D and g is dD/dt.  Each term's range is exact: D(u) peaks at
    u = +-1 and dD/dt has its minimum -1 at u = 0, maximum 1/8 at +-sqrt(3).
    """
    fa = 0.0
    fb = 0.0
    fmin = 0.0
    fmax = 0.0
    gmin = 0.0
    gmax = 0.0
    ga = 0.0
    gb = 0.0
    fabs = 0.0
    gabs = 0.0
    r3 = 1.7320508075688772
    for i in range(x.shape[0]):
        ul = x[i] - b
        uh = x[i] - a
        wl = 1.0 / (1.0 + ul * ul)
        wh = 1.0 / (1.0 + uh * uh)
        dl = ul * wl
        dh = uh * wh
        fa += dh
        fb += dl
        lo = min(dl, dh)
        hi = max(dl, dh)
        if ul <= 1.0 and uh >= 1.0:
            hi = 0.5
        if ul <= -1.0 and uh >= -1.0:
            lo = -0.5
        fmin += lo
        fmax += hi
        fabs += max(-lo, hi)
        gl = (1.0 - 2.0 * wl) * wl
        gh = (1.0 - 2.0 * wh) * wh
        ga += gh
        gb += gl
        lo = min(gl, gh)
        hi = max(gl, gh)
        if ul <= 0.0 and uh >= 0.0:
            lo = -1.0
        if (ul <= r3 and uh >= r3) or (ul <= -r3 and uh >= -r3):
            hi = 0.125
        gmin += lo
        gmax += hi
        gabs += max(-lo, hi)
    return fa, fb, fmin, fmax, ga, gb, gmin, gmax, fabs, gabs


@njit(cache=True, nogil=True)
def _refine(x, a, b, fa, order):
    """Safeguarded Newton/bisection for the single root in (a, b].

    ``order`` 0 solves D_n = 0, order 1 solves D_n' = 0.
    """
    # orient so that f(lo) < 0 < f(hi)
    if fa < 0.0:
        lo = a
        hi = b
    else:
        lo = b
        hi = a
    t = 0.5 * (a + b)
    dx_old = abs(b - a)
    dx = dx_old
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


@njit(cache=True, nogil=True)
def find_roots(x, scan_step, max_halvings):
    """Enumerate every real root of D_n by certified interval subdivision.

    Intervals are split until the summed per-term bounds either exclude a
    zero of D_n, certify it monotone (at most one root) or certify D_n'
    monotone (at most two roots, either side of the extremum).  Undecided
    intervals narrower than ``scan_step / 2**max_halvings``, or too narrow
    to split in floating point (next to huge outliers), are classified by
    their endpoint signs: a sign change is one root, none is no root.
    ``nsign`` counts those sign-only decisions; the caller checks parity.

    Returns (roots, brackets, count, status, min_width, nsign).
    """
    n = x.shape[0]
    cap = 2 * n + 1
    roots = np.empty(cap)
    brackets = np.empty((cap, 2))
    count = 0
    xmin = x[0]
    xmax = x[0]
    for i in range(n):
        if x[i] < xmin:
            xmin = x[i]
        if x[i] > xmax:
            xmax = x[i]
    if xmin == xmax:
        roots[0] = xmin
        brackets[0, 0] = xmin
        brackets[0, 1] = xmin
        return roots[:1], brackets[:1], 1, STATUS_OK, 0.0, 0
    floor = scan_step / 2.0 ** max_halvings
    # summation error bound relative to the sum of term magnitudes
    rel = (n + 4.0) * _EPS
    lo0 = xmin - 1.0
    hi0 = xmax + 1.0
    fa0 = score(x, lo0) * n
    fb0 = score(x, hi0) * n
    if not (fa0 > 0.0 and fb0 < 0.0):
        return roots[:0], brackets[:0], 0, STATUS_ENDPOINT, 0.0, 0
    sa = np.empty(_STACK)
    sb = np.empty(_STACK)
    top = 0
    sa[0] = lo0
    sb[0] = hi0
    top = 1
    min_width = hi0 - lo0
    nsign = 0
    while top > 0:
        top -= 1
        a = sa[top]
        b = sb[top]
        fa, fb, fmin, fmax, ga, gb, gmin, gmax, fabs, gabs = _enclose(x, a, b)
        margin = rel * fabs
        if fmin > margin or fmax < -margin:
            continue
        margin = rel * gabs
        # mode 0: D_n monotone; 1: unimodal around `apex`; 2: undecided
        mode = 0
        apex = a
        if not (gmax < -margin or gmin > margin):
            if b - a > _CURV_WIDTH:
                kmin = -1.0
                kmax = 1.0
                margin = 0.0
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
                # floating-point resolution reached: classify by endpoint signs
                if (fa > 0.0 and fb <= 0.0) or (fa < 0.0 and fb >= 0.0):
                    roots[count] = min(max(b if abs(fb) <= abs(fa) else a, xmin), xmax)
                    brackets[count, 0] = a
                    brackets[count, 1] = b
                    count += 1
                nsign += 1
                continue
            if w < floor:
                # below the floor intervals are classified by endpoint signs
                # alone (an odd-order root such as a triple root is never
                # certified otherwise); parity is then the remaining check
                nsign += 1
                if fa == 0.0:
                    # the root at a belongs to the left neighbour; take the
                    # sign just right of it from the midpoint
                    a = c
                    fa = score(x, c) * n
                if (fa > 0.0 and fb <= 0.0) or (fa < 0.0 and fb >= 0.0):
                    t = b if fb == 0.0 else _refine(x, a, b, fa, 0)
                    roots[count] = min(max(t, xmin), xmax)
                    brackets[count, 0] = a
                    brackets[count, 1] = b
                    count += 1
                continue
            if w < min_width:
                min_width = w
            if top + 2 > _STACK:
                return roots[:count], brackets[:count], count, STATUS_STACK, w, nsign
            # push right half first so the left half is processed first
            sa[top] = c
            sb[top] = b
            sa[top + 1] = a
            sb[top + 1] = c
            top += 2
            continue
        # one or two monotone pieces; a root sits in (p, q] iff f flips sign
        npieces = mode + 1
        fapex = score(x, apex) * n
        for piece in range(npieces):
            if mode == 0:
                p = a
                q = b
                fp = fa
                fq = fb
            elif piece == 0:
                p = a
                q = apex
                fp = fa
                fq = fapex
            else:
                p = apex
                q = b
                fp = fapex
                fq = fb
            if (fp > 0.0 and fq <= 0.0) or (fp < 0.0 and fq >= 0.0):
                if fq == 0.0:
                    t = q
                else:
                    t = _refine(x, p, q, fp, 0)
                roots[count] = min(max(t, xmin), xmax)
                brackets[count, 0] = p
                brackets[count, 1] = q
                count += 1
    return roots[:count], brackets[:count], count, STATUS_OK, min_width, nsign


@njit(cache=True, nogil=True)
def select_global(x, roots, count, tie_tol):
    """Pick the loss-minimizing root; ties go to the median, then the left.

    Returns (index, tie_flag, losses).
    """
    losses = np.empty(count)
    best = np.inf
    for k in range(count):
        losses[k] = loss(x, roots[k])
        if losses[k] < best:
            best = losses[k]
    med = np.median(x)
    pick = -1
    ntied = 0
    for k in range(count):
        if losses[k] <= best + tie_tol:
            ntied += 1
            if pick < 0:
                pick = k
            elif abs(roots[k] - med) < abs(roots[pick] - med) - tie_tol:
                pick = k
    return pick, ntied > 1, losses


@njit(cache=True, nogil=True)
def local_mle(x, start, max_steps):
    """Damped Newton descent on the loss from ``start``.

    Newton steps are taken where the loss is locally convex, gradient steps
    otherwise; every step is backtracked until the loss decreases.
    Returns (estimate, status, steps); status 0 means converged.
    """
    t = start
    cur = loss(x, t)
    for it in range(max_steps):
        f, df = _score_and_slope(x, t)
        # loss'(t) = -2 f, loss''(t) = -2 df
        if df < 0.0:
            step = -f / df
        else:
            step = 2.0 * f
        if abs(step) <= max(1e-12, 4.0 * _EPS * abs(t)):
            return t, 0, it
        if df < 0.0 and abs(step) < 1e-6 * (1.0 + abs(t)):
            # loss differences are at rounding level here; trust Newton
            t = t + step
            cur = loss(x, t)
            continue
        lam = 1.0
        accepted = False
        for _ in range(60):
            tn = t + lam * step
            ln = loss(x, tn)
            if ln <= cur:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            return t, 0, it
        t = tn
        cur = ln
    return t, 1, max_steps


@njit(cache=True, nogil=True)
def global_mle_batch(samples, scan_step, max_halvings, tie_tol, estimates, nroots, status):
    """Global MLE for every row of ``samples``; results written in place."""
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


@njit(cache=True, nogil=True)
def local_mle_batch(samples, max_steps, estimates, status):
    for r in range(samples.shape[0]):
        x = samples[r]
        t, st, _ = local_mle(x, np.median(x), max_steps)
        estimates[r] = t
        status[r] = st
