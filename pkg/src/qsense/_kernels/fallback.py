"""Pure-numpy Bloch-vector evolution kernel.

Reference implementation of the semantics shared with the compiled
extension.  Vectorised over trials, stepping through time in Python, so it
is adequate for moderate workloads and exact enough to serve as the
equivalence oracle for the compiled kernel.
"""

import numpy as np


def evolve_bloch(bloch, fields, dt, num_threads=1, start=0, stop=-1):
    """Rotate each Bloch vector through a piecewise-constant field history.

    Parameters
    ----------
    bloch : ndarray, shape (n_trials, 3)
        Bloch vectors, updated in place.
    fields : ndarray, shape (n_fields, n_steps, 3)
        Field components (hx, hy, hz) per step, with H = (h . sigma)/2 held
        constant over each step.  n_fields must equal n_trials, or 1 for a
        history shared by all trials.
    dt : float
        Step duration.
    num_threads : int
        Ignored; accepted for signature parity with the compiled kernel.
    start, stop : int
        Step range to apply (stop < 0 means all steps).

    Each step applies the exact axis-angle rotation: the Bloch vector
    precesses about h by the angle |h|*dt.  Zero-field steps are identity.
    """
    bloch = np.asarray(bloch)
    fields = np.asarray(fields)
    n = bloch.shape[0]
    nf = fields.shape[0]
    m = fields.shape[1]
    if nf not in (n, 1):
        raise ValueError("fields must have leading dimension n_trials or 1")
    if bloch.shape[1] != 3 or fields.shape[2] != 3:
        raise ValueError("bloch and fields must have trailing dimension 3")
    stop = m if stop < 0 else stop
    if start < 0 or stop > m or start > stop:
        raise ValueError("invalid step range")

    r = bloch
    for s in range(start, stop):
        h = fields[:, s, :]
        hn = np.sqrt(np.einsum("ij,ij->i", h, h))
        active = hn > 0.0
        if not np.any(active):
            continue
        safe = np.where(active, hn, 1.0)
        nhat = h / safe[:, None]
        th = hn * dt
        c = np.cos(th)[:, None]
        sn = np.sin(th)[:, None]
        omc = 1.0 - c
        dot = np.einsum("ij,ij->i", np.broadcast_to(nhat, r.shape), r)[:, None]
        cross = np.cross(nhat, r)
        rot = r * c + cross * sn + nhat * dot * omc
        if nf == 1 and not active[0]:
            continue
        if nf == 1:
            r[:] = rot
        else:
            r[active] = rot[active]
    return None
