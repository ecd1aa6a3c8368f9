"""JIT-compiled inner loop of the coupled wave-particle integration.

Kept free of any Python objects: plain float64 arrays in, scalars out, so
numba can compile it once (disk-cached) and the per-step cost stays at a
few thousand flops. The math mirrors ModePropagator.step and the
parity-split mode evaluation in wavefield.py; sin/cos over the harmonic
wavenumber ladder are generated by the angle-addition recurrence, which is
exactly odd/even under x -> -x, so mirror-symmetric runs negate bitwise.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# status codes returned by the kernel
RUNNING = 0
ESCAPED = 1
BLOWUP = 2

_BLOWUP_AMPLITUDE = 1.0e6
_CHECK_INTERVAL = 256


@njit(cache=True)
def _gradient(a, k, ss, cc, k1, x):
    """Field slope at x via the recurrence over harmonics of k1."""
    s1 = np.sin(k1 * x)
    c1 = np.cos(k1 * x)
    s = 0.0
    c = 1.0
    grad = 0.0
    for m in range(a.shape[0]):
        sn = s * c1 + c * s1
        c = c * c1 - s * s1
        s = sn
        grad += a[m] * k[m] * (ss[m] * c - cc[m] * s)
    return grad


@njit(cache=True)
def advance(a, adot, x_p, v_p, step_start, seg_steps, dt,
            k, ss, cc, overlap, n_forced,
            p11f, p12f, p21f, p22f,
            p11h, p12h, p21h, p22h,
            inv_w2, b_inv_w4,
            force_scale, two_eps, alpha, half_box, stride,
            samples, sample_idx,
            inertial, inertial_mass, drag, coupling):
    nm = a.shape[0]
    F0 = np.empty(nm)
    ah = np.empty(nm)
    adoth = np.empty(nm)
    status = RUNNING
    steps_done = 0
    half_dt = 0.5 * dt
    k1 = k[0]

    for step in range(seg_steps):
        if abs(x_p) > half_box:
            status = ESCAPED
            break
        g = step_start + step
        t0 = g * dt
        amp0 = -force_scale * np.sin(two_eps * t0)
        amph = -force_scale * np.sin(two_eps * (t0 + half_dt))
        amp1 = -force_scale * np.sin(two_eps * (t0 + dt))

        # pass 1, at x_p: field slope and forcing coefficients
        s1 = np.sin(k1 * x_p)
        c1 = np.cos(k1 * x_p)
        s = 0.0
        c = 1.0
        grad0 = 0.0
        for m in range(nm):
            sn = s * c1 + c * s1
            c = c * c1 - s * s1
            s = sn
            grad0 += a[m] * k[m] * (ss[m] * c - cc[m] * s)
            if m < n_forced:
                F0[m] = amp0 * overlap[m] * (ss[m] * s + cc[m] * c)

        if inertial:
            v0 = v_p
        else:
            v0 = -alpha * grad0
        x_mid = x_p + half_dt * v0

        # pass 2, at x_mid: half-step field update and its slope
        s1 = np.sin(k1 * x_mid)
        c1 = np.cos(k1 * x_mid)
        s = 0.0
        c = 1.0
        grad_mid = 0.0
        for m in range(nm):
            sn = s * c1 + c * s1
            c = c * c1 - s * s1
            s = sn
            f0 = F0[m] if m < n_forced else 0.0
            fh = amph * overlap[m] * (ss[m] * s + cc[m] * c) if m < n_forced else 0.0
            slope = (fh - f0) / half_dt
            apdot = slope * inv_w2[m]
            shift = slope * b_inv_w4[m]
            y = a[m] - (f0 * inv_w2[m] - shift)
            yd = adot[m] - apdot
            ahm = p11h[m] * y + p12h[m] * yd + fh * inv_w2[m] - shift
            ah[m] = ahm
            adoth[m] = p21h[m] * y + p22h[m] * yd + apdot
            grad_mid += ahm * k[m] * (ss[m] * c - cc[m] * s)

        if inertial:
            acc0 = (-drag * v_p - coupling * grad0) / inertial_mass
            v_half = v_p + half_dt * acc0
            acc_mid = (-drag * v_half - coupling * grad_mid) / inertial_mass
            x_new = x_p + dt * v_half
            v_new = v_p + dt * acc_mid
        else:
            v_mid = -alpha * grad_mid
            x_new = x_p + dt * v_mid
            v_new = v_mid

        # pass 3, at x_new: end forcing and the full field step
        s1 = np.sin(k1 * x_new)
        c1 = np.cos(k1 * x_new)
        s = 0.0
        c = 1.0
        for m in range(nm):
            sn = s * c1 + c * s1
            c = c * c1 - s * s1
            s = sn
            f0 = F0[m] if m < n_forced else 0.0
            f1 = amp1 * overlap[m] * (ss[m] * s + cc[m] * c) if m < n_forced else 0.0
            slope = (f1 - f0) / dt
            apdot = slope * inv_w2[m]
            shift = slope * b_inv_w4[m]
            y = a[m] - (f0 * inv_w2[m] - shift)
            yd = adot[m] - apdot
            a[m] = p11f[m] * y + p12f[m] * yd + f1 * inv_w2[m] - shift
            adot[m] = p21f[m] * y + p22f[m] * yd + apdot

        x_p = x_new
        v_p = v_new
        steps_done = step + 1
        g_next = g + 1

        if abs(x_p) > half_box:
            status = ESCAPED
            break

        if g_next % stride == 0:
            if inertial:
                v_diag = v_p
            else:
                v_diag = -alpha * _gradient(a, k, ss, cc, k1, x_p)
            samples[sample_idx, 0] = g_next * dt
            samples[sample_idx, 1] = x_p
            samples[sample_idx, 2] = v_diag
            sample_idx += 1

        if g_next % _CHECK_INTERVAL == 0:
            ok = True
            for m in range(nm):
                if not np.isfinite(a[m]) or abs(a[m]) > _BLOWUP_AMPLITUDE:
                    ok = False
                    break
            if not ok:
                status = BLOWUP
                break

    return x_p, v_p, status, steps_done, sample_idx
