"""Independent naive reference implementations used to validate the library.

Everything here is written directly from the feature/metric definitions with
plain loops and dense matrices, deliberately sharing no code with the
package. Slow and simple on purpose.
"""

import numpy as np

EPS = np.spacing(1)

DIRS_2D = [(1, 0), (0, 1), (1, 1), (1, -1)]


# ---------------------------------------------------------------------------
# quantization + first order

def naive_quantize(values, bin_width):
    v = np.asarray(values, dtype=float)
    return (np.floor((v - v.min()) / bin_width) + 1).astype(int)


def naive_first_order(values, bin_width, voxel_volume=1.0):
    v = np.sort(np.asarray(values, dtype=float).ravel())
    n = len(v)
    mean = v.mean()
    energy = float((v**2).sum())
    m2 = float(((v - mean) ** 2).mean())
    m3 = float(((v - mean) ** 3).mean())
    m4 = float(((v - mean) ** 4).mean())
    p10, p25, p50, p75, p90 = (np.percentile(v, q) for q in (10, 25, 50, 75, 90))

    sub = v[(v >= p10) & (v <= p90)]
    rmad = float(np.abs(sub - sub.mean()).mean()) if len(sub) else 0.0

    lev = naive_quantize(v, bin_width)
    counts = np.bincount(lev)[1:]
    p = counts[counts > 0] / n
    entropy = float(-(p * np.log2(p + EPS)).sum())
    uniformity = float((p**2).sum())

    return np.array([
        energy,
        voxel_volume * energy,
        entropy,
        v[0],
        p10,
        p90,
        v[-1],
        mean,
        p50,
        p75 - p25,
        v[-1] - v[0],
        float(np.abs(v - mean).mean()),
        rmad,
        float(np.sqrt(energy / n)),
        float(np.sqrt(m2)),
        m3 / m2**1.5 if m2 > 0 else 0.0,
        m4 / m2**2 if m2 > 0 else 0.0,
        m2,
        uniformity,
    ])


# ---------------------------------------------------------------------------
# GLCM

def naive_glcm_matrix(lev, dx, dy):
    ng = int(lev.max())
    mat = np.zeros((ng, ng))
    wx, wy = lev.shape
    for x in range(wx):
        for y in range(wy):
            x2, y2 = x + dx, y + dy
            if 0 <= x2 < wx and 0 <= y2 < wy:
                a, b = lev[x, y] - 1, lev[x2, y2] - 1
                mat[a, b] += 1
                mat[b, a] += 1
    return mat


def naive_glcm_features_dir(lev, dx, dy):
    mat = naive_glcm_matrix(lev, dx, dy)
    total = mat.sum()
    if total == 0:
        return None
    p = mat / total
    ng = p.shape[0]
    iv = np.arange(1, ng + 1, dtype=float)
    i = iv[:, None] * np.ones((1, ng))
    j = np.ones((ng, 1)) * iv[None, :]
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float((i * p).sum())
    mu_y = float((j * p).sum())
    sig_x = float(np.sqrt((((i - mu_x) ** 2) * p).sum()))
    sig_y = float(np.sqrt((((j - mu_y) ** 2) * p).sum()))

    pd = np.zeros(ng)  # |i-j| in 0..ng-1
    ps = np.zeros(2 * ng + 1)  # i+j in 2..2ng
    for a in range(ng):
        for b in range(ng):
            pd[abs(a - b)] += p[a, b]
            ps[a + b + 2] += p[a, b]
    kd = np.arange(ng, dtype=float)
    ks = np.arange(2 * ng + 1, dtype=float)

    hx = float(-(px * np.log2(px + EPS)).sum())
    hy = float(-(py * np.log2(py + EPS)).sum())
    hxy = float(-(p * np.log2(p + EPS)).sum())
    hxy1 = float(-(p * np.log2(px[:, None] * py[None, :] + EPS)).sum())
    pxy = px[:, None] * py[None, :]
    hxy2 = float(-(pxy * np.log2(pxy + EPS)).sum())

    da = float((kd * pd).sum())

    if sig_x * sig_y > 0:
        correlation = float((p * (i - mu_x) * (j - mu_y)).sum() / (sig_x * sig_y))
    else:
        correlation = 0.0
    imc1 = (hxy - hxy1) / max(hx, hy) if max(hx, hy) > 0 else 0.0
    inner = 1.0 - np.exp(-2.0 * (hxy2 - hxy))
    imc2 = float(np.sqrt(inner)) if inner > 0 else 0.0

    off = np.abs(i - j) > 0
    inv_var = float((p[off] / ((i - j)[off] ** 2)).sum())

    active = px > 0
    if active.sum() < 2:
        mcc = 1.0
    else:
        pa = p[np.ix_(active, active)]
        mx = px[active]
        mp = pa.shape[0]
        q = np.zeros((mp, mp))
        for a in range(mp):
            for b in range(mp):
                q[a, b] = sum(
                    pa[a, k] * pa[b, k] / (mx[a] * mx[k]) for k in range(mp)
                )
        ev = np.sort(np.linalg.eigvals(q).real)
        mcc = float(np.sqrt(ev[-2])) if ev[-2] > 1e-10 else 0.0  # noise floor

    return np.array([
        float((p * i * j).sum()),                               # autocorrelation
        mu_x,                                                   # joint average
        float((p * (i + j - mu_x - mu_y) ** 4).sum()),          # cluster prominence
        float((p * (i + j - mu_x - mu_y) ** 3).sum()),          # cluster shade
        float((p * (i + j - mu_x - mu_y) ** 2).sum()),          # cluster tendency
        float((p * (i - j) ** 2).sum()),                        # contrast
        correlation,
        da,                                                     # difference average
        float(-(pd * np.log2(pd + EPS)).sum()),                 # difference entropy
        float((pd * (kd - da) ** 2).sum()),                     # difference variance
        float((p**2).sum()),                                    # joint energy
        hxy,                                                    # joint entropy
        imc1,
        imc2,
        float((p / (1 + (i - j) ** 2)).sum()),                  # idm
        float((p / (1 + (i - j) ** 2 / ng**2)).sum()),          # idmn
        float((p / (1 + np.abs(i - j))).sum()),                 # id
        float((p / (1 + np.abs(i - j) / ng)).sum()),            # idn
        inv_var,
        float(p.max()),                                         # maximum probability
        float((ks * ps).sum()),                                 # sum average
        float(-(ps * np.log2(ps + EPS)).sum()),                 # sum entropy
        float(((i - mu_x) ** 2 * p).sum()),                     # sum of squares
        mcc,
    ])


def naive_glcm_features(lev, directions=DIRS_2D):
    per_dir = [naive_glcm_features_dir(lev, dx, dy) for dx, dy in directions]
    per_dir = [f for f in per_dir if f is not None]
    if not per_dir:
        return np.zeros(24)
    return np.mean(per_dir, axis=0)


# ---------------------------------------------------------------------------
# GLRLM

def naive_glrlm_matrix(lev, dx, dy):
    ng = int(lev.max())
    wx, wy = lev.shape
    maxlen = max(wx, wy)
    rl = np.zeros((ng, maxlen + 1))
    seen = np.zeros(lev.shape, dtype=bool)
    for x in range(wx):
        for y in range(wy):
            if 0 <= x - dx < wx and 0 <= y - dy < wy:
                continue  # not a line start
            cx, cy = x, y
            line = []
            while 0 <= cx < wx and 0 <= cy < wy:
                line.append(lev[cx, cy])
                seen[cx, cy] = True
                cx += dx
                cy += dy
            k = 0
            while k < len(line):
                k2 = k
                while k2 < len(line) and line[k2] == line[k]:
                    k2 += 1
                rl[line[k] - 1, k2 - k] += 1
                k = k2
    assert seen.all()
    return rl


def naive_glrlm_features_dir(lev, dx, dy):
    rl = naive_glrlm_matrix(lev, dx, dy)
    ng, maxlen = rl.shape[0], rl.shape[1] - 1
    nr = rl.sum()
    npix = lev.size
    iv = np.arange(1, ng + 1, dtype=float)[:, None]
    jv = np.arange(0, maxlen + 1, dtype=float)[None, :]
    p = rl / nr
    mu_i = float((p * iv).sum())
    mu_j = float((p * jv).sum())
    pr = rl[:, 1:]
    i2 = iv**2
    j2 = jv[:, 1:] ** 2
    pnz = p[p > 0]
    return np.array([
        float((pr / j2).sum() / nr),
        float((pr * j2).sum() / nr),
        float((rl.sum(axis=1) ** 2).sum() / nr),
        float((rl.sum(axis=1) ** 2).sum() / nr**2),
        float((rl.sum(axis=0) ** 2).sum() / nr),
        float((rl.sum(axis=0) ** 2).sum() / nr**2),
        float(nr / npix),
        float((p * (iv - mu_i) ** 2).sum()),
        float((p * (jv - mu_j) ** 2).sum()),
        float(-(pnz * np.log2(pnz + EPS)).sum()),
        float((pr / i2).sum() / nr),
        float((pr * i2).sum() / nr),
        float((pr / (i2 * j2)).sum() / nr),
        float((pr * i2 / j2).sum() / nr),
        float((pr * j2 / i2).sum() / nr),
        float((pr * i2 * j2).sum() / nr),
    ])


def naive_glrlm_features(lev, directions=DIRS_2D):
    return np.mean([naive_glrlm_features_dir(lev, dx, dy) for dx, dy in directions],
                   axis=0)


# ---------------------------------------------------------------------------
# GLSZM

def naive_zones(lev):
    """8-connected zones of equal level: list of (level, size)."""
    wx, wy = lev.shape
    seen = np.zeros(lev.shape, dtype=bool)
    zones = []
    for x in range(wx):
        for y in range(wy):
            if seen[x, y]:
                continue
            g = lev[x, y]
            stack = [(x, y)]
            seen[x, y] = True
            size = 0
            while stack:
                cx, cy = stack.pop()
                size += 1
                for ddx in (-1, 0, 1):
                    for ddy in (-1, 0, 1):
                        nx_, ny_ = cx + ddx, cy + ddy
                        if (0 <= nx_ < wx and 0 <= ny_ < wy
                                and not seen[nx_, ny_] and lev[nx_, ny_] == g):
                            seen[nx_, ny_] = True
                            stack.append((nx_, ny_))
            zones.append((int(g), size))
    return zones


def naive_glszm_features(lev):
    zones = naive_zones(lev)
    ng = int(lev.max())
    smax = max(s for _, s in zones)
    zm = np.zeros((ng, smax + 1))
    for g, s in zones:
        zm[g - 1, s] += 1
    ns = zm.sum()
    npix = lev.size
    iv = np.arange(1, ng + 1, dtype=float)[:, None]
    sv = np.arange(0, smax + 1, dtype=float)[None, :]
    p = zm / ns
    mu_i = float((p * iv).sum())
    mu_s = float((p * sv).sum())
    zz = zm[:, 1:]
    i2 = iv**2
    s2 = sv[:, 1:] ** 2
    pnz = p[p > 0]
    return np.array([
        float((zz / s2).sum() / ns),
        float((zz * s2).sum() / ns),
        float((zm.sum(axis=1) ** 2).sum() / ns),
        float((zm.sum(axis=1) ** 2).sum() / ns**2),
        float((zm.sum(axis=0) ** 2).sum() / ns),
        float((zm.sum(axis=0) ** 2).sum() / ns**2),
        float(ns / npix),
        float((p * (iv - mu_i) ** 2).sum()),
        float((p * (sv - mu_s) ** 2).sum()),
        float(-(pnz * np.log2(pnz + EPS)).sum()),
        float((zz / i2).sum() / ns),
        float((zz * i2).sum() / ns),
        float((zz / (i2 * s2)).sum() / ns),
        float((zz * i2 / s2).sum() / ns),
        float((zz * s2 / i2).sum() / ns),
        float((zz * i2 * s2).sum() / ns),
    ])


# ---------------------------------------------------------------------------
# NGTDM

def naive_ngtdm_features(lev):
    wx, wy = lev.shape
    ng = int(lev.max())
    s = np.zeros(ng + 1)
    n = np.zeros(ng + 1)
    for x in range(wx):
        for y in range(wy):
            nbr = []
            for ddx in (-1, 0, 1):
                for ddy in (-1, 0, 1):
                    if ddx == 0 and ddy == 0:
                        continue
                    x2, y2 = x + ddx, y + ddy
                    if 0 <= x2 < wx and 0 <= y2 < wy:
                        nbr.append(lev[x2, y2])
            if nbr:
                g = lev[x, y]
                s[g] += abs(g - np.mean(nbr))
                n[g] += 1
    nvp = n.sum()
    if nvp == 0:
        return np.array([1e6, 0.0, 0.0, 0.0, 0.0])
    p = n / nvp
    act = np.nonzero(n)[0]
    ngp = len(act)
    coars_den = float((p * s).sum())
    coarseness = 1.0 / coars_den if coars_den > 0 else 1e6
    contrast = 0.0
    busy_den = 0.0
    complexity = 0.0
    strength = 0.0
    for a in act:
        for b in act:
            contrast += p[a] * p[b] * (a - b) ** 2
            busy_den += abs(a * p[a] - b * p[b])
            complexity += abs(a - b) * (p[a] * s[a] + p[b] * s[b]) / (p[a] + p[b])
            strength += (p[a] + p[b]) * (a - b) ** 2
    contrast = contrast / (ngp * (ngp - 1)) * s.sum() / nvp if ngp > 1 else 0.0
    busyness = coars_den / busy_den if busy_den > 0 else 0.0
    strength = strength / s.sum() if s.sum() > 0 else 0.0
    return np.array([coarseness, contrast, busyness, complexity / nvp, strength])


# ---------------------------------------------------------------------------
# GLDM

def naive_gldm_features(lev):
    wx, wy = lev.shape
    ng = int(lev.max())
    dm = np.zeros((ng, 10))
    for x in range(wx):
        for y in range(wy):
            dep = 1
            for ddx in (-1, 0, 1):
                for ddy in (-1, 0, 1):
                    if ddx == 0 and ddy == 0:
                        continue
                    x2, y2 = x + ddx, y + ddy
                    if 0 <= x2 < wx and 0 <= y2 < wy and lev[x2, y2] == lev[x, y]:
                        dep += 1
            dm[lev[x, y] - 1, dep] += 1
    nz = dm.sum()
    iv = np.arange(1, ng + 1, dtype=float)[:, None]
    jv = np.arange(0, 10, dtype=float)[None, :]
    p = dm / nz
    mu_i = float((p * iv).sum())
    mu_j = float((p * jv).sum())
    dd = dm[:, 1:]
    i2 = iv**2
    j2 = jv[:, 1:] ** 2
    pnz = p[p > 0]
    return np.array([
        float((dd / j2).sum() / nz),
        float((dd * j2).sum() / nz),
        float((dm.sum(axis=1) ** 2).sum() / nz),
        float((dm.sum(axis=0) ** 2).sum() / nz),
        float((dm.sum(axis=0) ** 2).sum() / nz**2),
        float((p * (iv - mu_i) ** 2).sum()),
        float((p * (jv - mu_j) ** 2).sum()),
        float(-(pnz * np.log2(pnz + EPS)).sum()),
        float((dd / i2).sum() / nz),
        float((dd * i2).sum() / nz),
        float((dd / (i2 * j2)).sum() / nz),
        float((dd * i2 / j2).sum() / nz),
        float((dd * j2 / i2).sum() / nz),
        float((dd * i2 * j2).sum() / nz),
    ])


def naive_texture94(values, bin_width, voxel_volume=1.0):
    """All 94 window features in canonical order from the naive pieces."""
    win = np.asarray(values, dtype=float)
    lev = naive_quantize(win, bin_width)
    return np.concatenate([
        naive_first_order(win, bin_width, voxel_volume),
        naive_glcm_features(lev),
        naive_glrlm_features(lev),
        naive_glszm_features(lev),
        naive_ngtdm_features(lev),
        naive_gldm_features(lev),
    ])


# ---------------------------------------------------------------------------
# geometry

def brute_force_boundary_distance(mask, spacing):
    """All-pairs nearest-background distance; exterior counts as background."""
    mask = np.asarray(mask)
    sx, sy, sz = spacing
    nx, ny, nz = mask.shape
    bg = [
        (x, y, z)
        for x in range(-1, nx + 1)
        for y in range(-1, ny + 1)
        for z in range(-1, nz + 1)
        if not (0 <= x < nx and 0 <= y < ny and 0 <= z < nz) or mask[x, y, z] == 0
    ]
    bg = np.array(bg, dtype=float)
    out = np.zeros(mask.shape)
    for x in range(nx):
        for y in range(ny):
            for z in range(nz):
                if mask[x, y, z]:
                    d = ((bg[:, 0] - x) * sx) ** 2 + ((bg[:, 1] - y) * sy) ** 2 \
                        + ((bg[:, 2] - z) * sz) ** 2
                    out[x, y, z] = np.sqrt(d.min())
    return out


# ---------------------------------------------------------------------------
# metrics

def naive_auroc(scores, labels):
    """Pairwise Mann-Whitney comparison; single division at the end."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                total += 1.0
            elif sp == sn:
                total += 0.5
    return total / (len(pos) * len(neg))


def expvalue(tree, x, subset):
    """Tree-conditional expectation: follow x on subset features, else
    cover-weighted average over children."""
    feat, thr, left, right, value, cover = tree

    def rec(i):
        if left[i] < 0:
            return value[i]
        if feat[i] in subset:
            nxt = left[i] if x[feat[i]] < thr[i] else right[i]
            return rec(nxt)
        wl, wr = cover[left[i]], cover[right[i]]
        return (wl * rec(left[i]) + wr * rec(right[i])) / (wl + wr)

    return rec(0)


def brute_force_shapley(trees, base_margin, x, n_features):
    """Exact Shapley values by subset enumeration (tree-conditional values)."""
    from itertools import combinations
    from math import factorial

    def v(subset):
        return base_margin + sum(expvalue(t, x, subset) for t in trees)

    phi = np.zeros(n_features)
    feats = list(range(n_features))
    d = n_features
    for jf in feats:
        rest = [f for f in feats if f != jf]
        for size in range(d):
            w = factorial(size) * factorial(d - size - 1) / factorial(d)
            for sub in combinations(rest, size):
                s = frozenset(sub)
                phi[jf] += w * (v(s | {jf}) - v(s))
    return phi, v(frozenset())
