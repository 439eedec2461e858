"""Pure-Python simulation kernel.

Reference implementation of the single sweep shared with the compiled
backend in _speedups.pyx.  Both consume the random stream identically
(one standard-exponential germ gap, then one uniform mark per germ; the
final overshooting germ consumes only its gap) and both accumulate
covered length per occupied component in germ order, so results agree
bit for bit.  Keep the two in lockstep when editing either.

Window accounting is always over [0, end]; ``start`` (<= 0) is where germ
generation begins, negative for full-line runs with a left buffer.
"""

from __future__ import annotations

import math

from ..distributions import MAX_FINITE, invert_tail

FAMILY_CONSTANT = 0
FAMILY_EXPONENTIAL = 1
FAMILY_PARETO = 2
FAMILY_TABLE = 3


def _draw_rho(um, family, p0, p1, tab_y, tab_s):
    # p0/p1 per family: constant (c, -), exponential (mean, -),
    # pareto (alpha, -1/alpha), table (-, extrapolation exponent)
    if family == FAMILY_CONSTANT:
        return p0
    if family == FAMILY_EXPONENTIAL:
        if um > 0.0:
            return -p0 * math.log(um)
        return math.inf
    if family == FAMILY_PARETO:
        # overflow means inf, matching C pow in the compiled kernel
        if um <= 0.0:
            return math.inf
        try:
            if p0 == 1.0:
                return 1.0 / um
            if p0 == 0.5:
                d = um * um
                return 1.0 / d if d > 0.0 else math.inf
            return um**p1
        except OverflowError:
            return math.inf
    return invert_tail(um, tab_y, tab_s, p1)


def simulate_stats(gen, lam, start, end, family, p0, p1, tab_y, tab_s, probes, probe_out, gaps_out):
    """One realization's window statistics in a single sweep.

    Returns (n_germs, n_clamped, n_gaps, covered_len, gap_total,
    left_censored, right_censored).  Complete vacant gap lengths are
    written to gaps_out up to its capacity; n_gaps keeps counting past it
    (the caller detects overflow, rewinds the generator state and reruns
    with a large enough buffer).

    Stops early once coverage reach passes the window end, so n_germs and
    the stream position can differ from sample_germs with the same seed;
    every returned statistic is unaffected.
    """
    n_probes = len(probes)
    cap = len(gaps_out)
    exp = gen.standard_exponential
    uni = gen.random

    u = start
    reach = start
    comp_open = False
    comp_start = 0.0
    i_probe = 0
    n_germs = 0
    n_clamped = 0
    n_gaps = 0
    covered = 0.0
    gap_total = 0.0
    left_c = 0.0
    right_c = 0.0

    while True:
        u = u + exp() / lam
        if u > end:
            break
        while i_probe < n_probes and probes[i_probe] < u:
            p = probes[i_probe]
            probe_out[i_probe] = 1 if (reach > start and reach >= p) else 0
            i_probe += 1
        um = uni()
        rho = _draw_rho(um, family, p0, p1, tab_y, tab_s)
        if rho > MAX_FINITE:
            rho = MAX_FINITE
            n_clamped += 1
        n_germs += 1
        if u > reach:
            # the vacant gap (reach, u) closes here
            if comp_open:
                a = comp_start if comp_start > 0.0 else 0.0
                b = reach if reach < end else end
                if b > a:
                    covered += b - a
                comp_open = False
            if reach >= 0.0:
                glen = u - reach
                if n_gaps < cap:
                    gaps_out[n_gaps] = glen
                n_gaps += 1
                gap_total += glen
            elif u > 0.0:
                left_c += u
            comp_start = u
            comp_open = True
        r = u + rho
        if r > reach:
            reach = r
        if reach >= end:
            # coverage already runs past the window end; later germs in
            # (u, end] land inside this contiguous component and cannot
            # change any window statistic, so stop consuming the stream
            break

    while i_probe < n_probes:
        p = probes[i_probe]
        probe_out[i_probe] = 1 if (reach > start and reach >= p) else 0
        i_probe += 1
    if comp_open:
        a = comp_start if comp_start > 0.0 else 0.0
        b = reach if reach < end else end
        if b > a:
            covered += b - a
    if reach < end:
        if reach >= 0.0:
            right_c = end - reach
        else:
            left_c += end

    return (n_germs, n_clamped, n_gaps, covered, gap_total, left_c, right_c)


def sample_germs(gen, lam, start, end, family, p0, p1, tab_y, tab_s, u_out, rho_out):
    """Draw the germs of one realization into u_out/rho_out.

    Returns (n_germs, n_clamped); n_germs may exceed the buffer capacity,
    in which case only the first cap germs are stored but the stream is
    consumed exactly as in a large-enough run.
    """
    cap = len(u_out)
    exp = gen.standard_exponential
    uni = gen.random

    u = start
    n = 0
    n_clamped = 0
    while True:
        u = u + exp() / lam
        if u > end:
            break
        um = uni()
        rho = _draw_rho(um, family, p0, p1, tab_y, tab_s)
        if rho > MAX_FINITE:
            rho = MAX_FINITE
            n_clamped += 1
        if n < cap:
            u_out[n] = u
            rho_out[n] = rho
        n += 1
    return (n, n_clamped)
