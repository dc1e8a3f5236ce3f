# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Bloch-vector evolution kernel.

Semantics are defined by :mod:`qsense._kernels.fallback`; this module is a
drop-in replacement that releases the GIL and optionally threads over
trials with OpenMP.
"""

from cython.parallel cimport prange

from libc.math cimport cos, sin, sqrt


def evolve_bloch(double[:, ::1] bloch, double[:, :, ::1] fields, double dt,
                 int num_threads=1, Py_ssize_t start=0, Py_ssize_t stop=-1):
    """Rotate each Bloch vector through a piecewise-constant field history.

    ``bloch`` is (n_trials, 3) and is updated in place.  ``fields`` is
    (n_fields, n_steps, 3) with n_fields equal to n_trials or 1 (shared
    history).  Each step applies the exact axis-angle rotation generated by
    H = (hx*sx + hy*sy + hz*sz)/2 held constant for ``dt``, i.e. the Bloch
    vector precesses about h by |h|*dt.  ``start``/``stop`` bound the step
    range (stop < 0 means all steps), so a contiguous array can be
    consumed one segment at a time.
    """
    cdef Py_ssize_t n = bloch.shape[0]
    cdef Py_ssize_t nf = fields.shape[0]
    cdef Py_ssize_t m = fields.shape[1]
    cdef Py_ssize_t i, s, j
    cdef double hx, hy, hz, hn, th, c, sn, omc
    cdef double nx, ny, nz, rx, ry, rz, dot, cx, cy, cz
    cdef int nt = num_threads if num_threads > 0 else 1
    cdef Py_ssize_t lo = start
    cdef Py_ssize_t hi = m if stop < 0 else stop

    if nf != n and nf != 1:
        raise ValueError("fields must have leading dimension n_trials or 1")
    if bloch.shape[1] != 3 or fields.shape[2] != 3:
        raise ValueError("bloch and fields must have trailing dimension 3")
    if lo < 0 or hi > m or lo > hi:
        raise ValueError("invalid step range")

    for i in prange(n, nogil=True, schedule="static", num_threads=nt):
        j = i if nf > 1 else 0
        rx = bloch[i, 0]
        ry = bloch[i, 1]
        rz = bloch[i, 2]
        for s in range(lo, hi):
            hx = fields[j, s, 0]
            hy = fields[j, s, 1]
            hz = fields[j, s, 2]
            hn = sqrt(hx * hx + hy * hy + hz * hz)
            if hn == 0.0:
                continue
            th = hn * dt
            nx = hx / hn
            ny = hy / hn
            nz = hz / hn
            c = cos(th)
            sn = sin(th)
            omc = 1.0 - c
            dot = nx * rx + ny * ry + nz * rz
            cx = ny * rz - nz * ry
            cy = nz * rx - nx * rz
            cz = nx * ry - ny * rx
            rx = rx * c + cx * sn + nx * dot * omc
            ry = ry * c + cy * sn + ny * dot * omc
            rz = rz * c + cz * sn + nz * dot * omc
        bloch[i, 0] = rx
        bloch[i, 1] = ry
        bloch[i, 2] = rz
