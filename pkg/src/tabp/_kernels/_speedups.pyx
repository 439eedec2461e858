# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernel.

Line-for-line mirror of pure.py: same stream consumption (one
standard-exponential germ gap then one uniform mark per germ, none for
the final overshooting germ), same branch structure in the inverse-tail
transforms, same per-component accumulation order of covered length.
Keep the two in lockstep when editing either.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport log, pow

from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_exponential

cdef extern from "float.h":
    double DBL_MAX

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef bitgen_t *_bitgen(object gen) except NULL:
    capsule = gen.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
        raise ValueError("invalid BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)


cdef inline double _invert_tail(double u, const double[::1] ys, const double[::1] ss,
                                double beta) noexcept nogil:
    cdef Py_ssize_t n = ys.shape[0]
    cdef Py_ssize_t lo, hi, mid
    if u >= ss[0]:
        if ss[0] >= 1.0:
            return ys[0]
        return ys[0] * (1.0 - u) / (1.0 - ss[0])
    if u < ss[n - 1]:
        # u = 0 gives pow(0, negative) = inf, clamped by the caller
        return ys[n - 1] * pow(u / ss[n - 1], -1.0 / beta)
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ss[mid] > u:
            lo = mid
        else:
            hi = mid
    return ys[lo] + (ss[lo] - u) * (ys[lo + 1] - ys[lo]) / (ss[lo] - ss[lo + 1])


cdef inline double _draw_rho(double um, int family, double p0, double p1,
                             const double[::1] tab_y, const double[::1] tab_s) noexcept nogil:
    # p0/p1 per family: constant (c, -), exponential (mean, -),
    # pareto (alpha, -1/alpha), table (-, extrapolation exponent)
    if family == 0:
        return p0
    if family == 1:
        return -p0 * log(um)
    if family == 2:
        if p0 == 1.0:
            return 1.0 / um
        if p0 == 0.5:
            return 1.0 / (um * um)
        return pow(um, p1)
    return _invert_tail(um, tab_y, tab_s, p1)


def simulate_stats(object gen, double lam, double start, double end,
                   int family, double p0, double p1,
                   const double[::1] tab_y, const double[::1] tab_s,
                   const double[::1] probes, unsigned char[::1] probe_out,
                   double[::1] gaps_out):
    """One realization's window statistics; see pure.simulate_stats."""
    cdef bitgen_t *rng = _bitgen(gen)
    cdef Py_ssize_t n_probes = probes.shape[0]
    cdef Py_ssize_t cap = gaps_out.shape[0]
    cdef Py_ssize_t i_probe = 0
    cdef double u = start
    cdef double reach = start
    cdef double comp_start = 0.0
    cdef bint comp_open = 0
    cdef long n_germs = 0
    cdef long n_clamped = 0
    cdef long n_gaps = 0
    cdef double covered = 0.0
    cdef double gap_total = 0.0
    cdef double left_c = 0.0
    cdef double right_c = 0.0
    cdef double um, rho, r, a, b, glen, p

    with nogil:
        while True:
            u = u + random_standard_exponential(rng) / lam
            if u > end:
                break
            while i_probe < n_probes and probes[i_probe] < u:
                p = probes[i_probe]
                probe_out[i_probe] = 1 if (reach > start and reach >= p) else 0
                i_probe += 1
            um = rng.next_double(rng.state)
            rho = _draw_rho(um, family, p0, p1, tab_y, tab_s)
            if rho > DBL_MAX:
                rho = DBL_MAX
                n_clamped += 1
            n_germs += 1
            if u > reach:
                # the vacant gap (reach, u) closes here
                if comp_open:
                    a = comp_start if comp_start > 0.0 else 0.0
                    b = reach if reach < end else end
                    if b > a:
                        covered += b - a
                    comp_open = 0
                if reach >= 0.0:
                    glen = u - reach
                    if n_gaps < cap:
                        gaps_out[n_gaps] = glen
                    n_gaps += 1
                    gap_total += glen
                elif u > 0.0:
                    left_c += u
                comp_start = u
                comp_open = 1
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


def sample_germs(object gen, double lam, double start, double end,
                 int family, double p0, double p1,
                 const double[::1] tab_y, const double[::1] tab_s,
                 double[::1] u_out, double[::1] rho_out):
    """Draw one realization's germs; see pure.sample_germs."""
    cdef bitgen_t *rng = _bitgen(gen)
    cdef Py_ssize_t cap = u_out.shape[0]
    cdef double u = start
    cdef long n = 0
    cdef long n_clamped = 0
    cdef double um, rho

    with nogil:
        while True:
            u = u + random_standard_exponential(rng) / lam
            if u > end:
                break
            um = rng.next_double(rng.state)
            rho = _draw_rho(um, family, p0, p1, tab_y, tab_s)
            if rho > DBL_MAX:
                rho = DBL_MAX
                n_clamped += 1
            if n < cap:
                u_out[n] = u
                rho_out[n] = rho
            n += 1

    return (n, n_clamped)
