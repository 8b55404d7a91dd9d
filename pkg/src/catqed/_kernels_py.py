"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``.

Both modules expose the same two functions with identical semantics; the
choice between them is made once in :mod:`catqed._backend`.
"""

import math

import numpy as np

NAME = "python"


def laguerre_tables(rho):
    """Point-independent pieces of the diagonal Laguerre recurrence.

    Returns ``(coef, a, b, c)`` indexed ``[k, n]``: ``coef`` folds the
    (-1)^n sign and the factor 2 for k > 0 into rho[n, n+k]; ``a`` and ``b``
    are the recurrence weights and ``c[k] = 1/sqrt(k)`` seeds f_0^k.
    """
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    dim = rho.shape[0]
    coef = np.zeros((dim, dim), dtype=np.complex128)
    a = np.zeros((dim, dim))
    b = np.zeros((dim, dim))
    sgn = np.where(np.arange(dim) % 2, -1.0, 1.0)
    for k in range(dim):
        n = np.arange(dim - k)
        coef[k, : dim - k] = (1.0 if k == 0 else 2.0) * sgn[n] * np.diagonal(rho, k)
        a[k, : dim - k] = np.sqrt((n + 1.0) / (n + k + 1.0))
        b[k, 1 : dim - k] = np.sqrt((n[1:] + 1.0) * n[1:] / ((n[1:] + k + 1.0) * (n[1:] + k)))
    c = 1.0 / np.sqrt(np.maximum(np.arange(dim), 1.0))
    return coef, a, b, c


def wigner_grid(rho, beta_re, beta_im):
    """W(beta) = (2/pi) sum_mn rho[n, m] <m|D(2 beta)|n> (-1)^n on a grid.

    With g = 2 beta = sqrt(x) e^{i theta}, the element <n+k|D(g)|n> is
    e^{i k theta} f_n^k(x), where
    ``f_n^k = sqrt(n!/(n+k)!) x^{k/2} e^{-x/2} L_n^k(x)``. Each diagonal k
    is generated by the three-term Laguerre recurrence in n, which stays
    accurate for large |g|. Matrix elements are those of the untruncated
    operator, so no truncation error enters beyond the support of ``rho``.
    """
    coef, a, b, c = laguerre_tables(rho)
    dim = coef.shape[0]
    br = np.asarray(beta_re, dtype=float)
    bi = np.asarray(beta_im, dtype=float)
    g = 2.0 * (br[:, None] + 1j * bi[None, :]).ravel()
    x = np.abs(g) ** 2
    root = np.sqrt(x)
    phase = np.where(x > 0, g / np.where(x > 0, root, 1.0), 1.0)

    total = np.zeros(g.size)
    rot = np.ones(g.size, dtype=np.complex128)
    seed = np.exp(-0.5 * x)  # f_0^k, advanced by sqrt(x / k) per diagonal
    for k in range(dim):
        if k:
            rot = rot * phase
            seed = seed * root * c[k]
        f_prev = seed
        acc = (coef[k, 0] * rot).real * f_prev
        if dim - k > 1:
            f = f_prev * (1.0 + k - x) * a[k, 0]
            for n in range(1, dim - k):
                acc += (coef[k, n] * rot).real * f
                if n + 1 < dim - k:
                    f, f_prev = ((2 * n + k + 1 - x) * f * a[k, n] - (n + k) * f_prev * b[k, n]) / (n + 1), f
        total += acc
    return (2.0 / math.pi) * total.reshape(br.size, bi.size)


def _waiting_time(p, n_idx, kappa, horizon, u):
    """Smallest tau in [0, horizon] with sum_n p_n exp(-kappa n tau) = u.

    Returns ``None`` when no jump happens before ``horizon``.
    """
    surv = float(np.dot(p, np.exp(-kappa * n_idx * horizon)))
    if surv > u:
        return None
    tau = 0.0
    for _ in range(200):
        w = p * np.exp(-kappa * n_idx * tau)
        f = float(w.sum()) - u
        df = -kappa * float(np.dot(n_idx, w))
        if df == 0.0:
            break
        step = -f / df
        # survival is convex and decreasing: Newton from the left never overshoots
        tau = min(tau + step, horizon)
        if step <= 1e-15 * (1.0 + tau):
            break
    return tau


def sample_jumps(pops, kappa, t_final, uniforms):
    """Exact photon-loss jump times for a batch of trajectories.

    ``pops`` are the initial photon-number populations (the jump process
    depends on nothing else). Row ``s`` of ``uniforms`` feeds trajectory
    ``s``; its length must be at least the number of levels, which bounds
    the number of jumps. Returns ``(counts, times)`` where ``times`` is
    NaN-padded.
    """
    p0 = np.asarray(pops, dtype=float)
    p0 = p0 / p0.sum()
    u = np.asarray(uniforms, dtype=float)
    n_shots, width = u.shape
    dim = p0.shape[0]
    n_idx = np.arange(dim, dtype=float)
    counts = np.zeros(n_shots, dtype=np.int64)
    times = np.full((n_shots, width), np.nan)
    if kappa <= 0.0 or t_final <= 0.0:
        return counts, times
    for s in range(n_shots):
        p = p0.copy()
        t = 0.0
        j = 0
        while j < width and p[1:].sum() > 0.0:
            tau = _waiting_time(p, n_idx, kappa, t_final - t, u[s, j])
            if tau is None:
                break
            t += tau
            times[s, j] = t
            j += 1
            p = p * np.exp(-kappa * n_idx * tau)
            p = np.append(n_idx[1:] * p[1:], 0.0)
            p /= p.sum()
        counts[s] = j
    return counts, times
