"""Numba kernels for per-voxel sliding-window feature extraction.

Every 2D texture family works on a min-anchored fixed-bin-width quantization
of the (2r+1)^2 in-plane window around a voxel (clipped at image borders).
Windows keep all their voxels, including ones outside the prostate mask.

Quantized gray levels are bin indices starting at 1; the matrices are stored
compactly over the <= 25 distinct levels actually present in a window, with
formulas evaluated on the true bin-index values, so results are identical to
a dense 1..Ng formulation.

Degenerate-denominator conventions (flat windows etc.) are pinned here and
mirrored verbatim by the test oracles:

* first-order skewness/kurtosis with zero variance -> 0
* GLCM correlation with zero sigma -> 0; IMC1 with zero entropy -> 0;
  IMC2 inner term clamped at 0; MCC of a single-level direction -> 1
* NGTDM coarseness with zero denominator -> 1e6 cap; busyness/strength with
  zero denominator -> 0
* directions with no voxel pairs are excluded from GLCM direction averaging
  (all-empty -> feature 0)
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

EPS = 2.220446049250313e-16
COARSENESS_CAP = 1.0e6

# in-plane pair/run directions: 0, 90, 45, 135 degrees
DIRECTIONS = np.array([[1, 0], [0, 1], [1, 1], [1, -1]], dtype=np.int64)

N_FO = 19
N_GLCM = 24
N_GLRLM = 16
N_GLSZM = 16
N_NGTDM = 5
N_GLDM = 14
N_T2W = N_FO + N_GLCM + N_GLRLM + N_GLSZM + N_NGTDM + N_GLDM  # 94


@njit(cache=True)
def _quantize_compact(buf, wx, wy, bin_width, lev, u):
    """Quantize a window in place.

    Fills ``lev`` (wx, wy) with compact level indices 0..m-1 and ``u`` with
    the m distinct bin-index values (1-based, ascending). Returns (m, ng)
    where ng is the highest bin index.
    """
    n = wx * wy
    wmin = buf[0, 0]
    for x in range(wx):
        for y in range(wy):
            if buf[x, y] < wmin:
                wmin = buf[x, y]
    tmp = np.empty(n, dtype=np.int64)
    k = 0
    for x in range(wx):
        for y in range(wy):
            g = np.int64(np.floor((buf[x, y] - wmin) / bin_width)) + 1
            lev[x, y] = g
            tmp[k] = g
            k += 1
    tmp = np.sort(tmp)
    m = 0
    for i in range(n):
        if i == 0 or tmp[i] != tmp[i - 1]:
            u[m] = np.float64(tmp[i])
            m += 1
    ng = u[m - 1]
    # remap dense level -> compact index (binary search over u[:m])
    for x in range(wx):
        for y in range(wy):
            g = np.float64(lev[x, y])
            lo, hi = 0, m - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if u[mid] < g:
                    lo = mid + 1
                else:
                    hi = mid
            lev[x, y] = lo
    return m, ng


@njit(cache=True)
def _percentile(sorted_vals, n, q):
    """Linear-interpolation percentile of a pre-sorted array."""
    if n == 1:
        return sorted_vals[0]
    h = (n - 1) * q / 100.0
    lo = int(np.floor(h))
    if lo >= n - 1:
        return sorted_vals[n - 1]
    f = h - lo
    return sorted_vals[lo] + f * (sorted_vals[lo + 1] - sorted_vals[lo])


@njit(cache=True)
def _first_order19(vals, n, bin_width, voxvol, out, off):
    """The 19 first-order features of a flat window (any channel)."""
    v = np.sort(vals[:n])
    total = 0.0
    energy = 0.0
    for i in range(n):
        total += v[i]
        energy += v[i] * v[i]
    mean = total / n
    m2 = 0.0
    m3 = 0.0
    m4 = 0.0
    mad = 0.0
    for i in range(n):
        d = v[i] - mean
        m2 += d * d
        m3 += d * d * d
        m4 += d * d * d * d
        mad += abs(d)
    m2 /= n
    m3 /= n
    m4 /= n
    mad /= n

    p10 = _percentile(v, n, 10.0)
    p25 = _percentile(v, n, 25.0)
    p50 = _percentile(v, n, 50.0)
    p75 = _percentile(v, n, 75.0)
    p90 = _percentile(v, n, 90.0)

    # robust MAD over the [p10, p90] subset
    rsum = 0.0
    rcount = 0
    for i in range(n):
        if p10 <= v[i] <= p90:
            rsum += v[i]
            rcount += 1
    rmad = 0.0
    if rcount > 0:
        rmean = rsum / rcount
        for i in range(n):
            if p10 <= v[i] <= p90:
                rmad += abs(v[i] - rmean)
        rmad /= rcount

    # histogram entropy/uniformity on the min-anchored fixed-width bins;
    # equal bins are contiguous in the sorted order
    entropy = 0.0
    uniformity = 0.0
    i = 0
    while i < n:
        g = np.int64(np.floor((v[i] - v[0]) / bin_width))
        j = i
        while j < n and np.int64(np.floor((v[j] - v[0]) / bin_width)) == g:
            j += 1
        p = (j - i) / n
        entropy -= p * np.log2(p + EPS)
        uniformity += p * p
        i = j

    out[off + 0] = energy
    out[off + 1] = voxvol * energy
    out[off + 2] = entropy
    out[off + 3] = v[0]
    out[off + 4] = p10
    out[off + 5] = p90
    out[off + 6] = v[n - 1]
    out[off + 7] = mean
    out[off + 8] = p50
    out[off + 9] = p75 - p25
    out[off + 10] = v[n - 1] - v[0]
    out[off + 11] = mad
    out[off + 12] = rmad
    out[off + 13] = np.sqrt(energy / n)
    out[off + 14] = np.sqrt(m2)
    out[off + 15] = m3 / m2**1.5 if m2 > 0 else 0.0
    out[off + 16] = m4 / (m2 * m2) if m2 > 0 else 0.0
    out[off + 17] = m2
    out[off + 18] = uniformity


@njit(cache=True)
def _glcm24_dir(lev, wx, wy, m, u, ng, dx, dy, out):
    """Symmetric distance-1 GLCM features for one direction.

    Returns the pair count (0 means the direction is empty and ``out`` is
    untouched).
    """
    mat = np.zeros((m, m))
    count = 0
    for x in range(wx):
        for y in range(wy):
            x2 = x + dx
            y2 = y + dy
            if 0 <= x2 < wx and 0 <= y2 < wy:
                a = lev[x, y]
                b = lev[x2, y2]
                mat[a, b] += 1.0
                mat[b, a] += 1.0
                count += 2
    if count == 0:
        return 0
    t = np.float64(count)

    px = np.zeros(m)
    for a in range(m):
        s = 0.0
        for b in range(m):
            s += mat[a, b]
        px[a] = s / t

    mu = 0.0
    for a in range(m):
        mu += u[a] * px[a]
    sig2 = 0.0
    for a in range(m):
        d = u[a] - mu
        sig2 += d * d * px[a]
    sig = np.sqrt(sig2)

    autoc = 0.0
    clus_p = 0.0
    clus_s = 0.0
    clus_t = 0.0
    contrast = 0.0
    corr_num = 0.0
    diff_avg = 0.0
    joint_energy = 0.0
    hxy = 0.0
    hxy1 = 0.0
    idm = 0.0
    idmn = 0.0
    idf = 0.0
    idn = 0.0
    inv_var = 0.0
    max_prob = 0.0
    sum_avg = 0.0

    for a in range(m):
        for b in range(m):
            p = mat[a, b] / t
            if p <= 0.0:
                continue
            ua = u[a]
            ub = u[b]
            d = ua - ub
            ad = abs(d)
            s2 = ua + ub - 2.0 * mu
            autoc += p * ua * ub
            clus_p += p * s2 * s2 * s2 * s2
            clus_s += p * s2 * s2 * s2
            clus_t += p * s2 * s2
            contrast += p * d * d
            corr_num += p * (ua - mu) * (ub - mu)
            diff_avg += p * ad
            joint_energy += p * p
            hxy -= p * np.log2(p + EPS)
            hxy1 -= p * np.log2(px[a] * px[b] + EPS)
            idm += p / (1.0 + d * d)
            idmn += p / (1.0 + d * d / (ng * ng))
            idf += p / (1.0 + ad)
            idn += p / (1.0 + ad / ng)
            if ad > 0.0:
                inv_var += p / (d * d)
            if p > max_prob:
                max_prob = p
            sum_avg += p * (ua + ub)

    diff_var = 0.0
    for a in range(m):
        for b in range(m):
            p = mat[a, b] / t
            if p <= 0.0:
                continue
            e = abs(u[a] - u[b]) - diff_avg
            diff_var += p * e * e

    hx = 0.0
    hxy2 = 0.0
    for a in range(m):
        if px[a] > 0.0:
            hx -= px[a] * np.log2(px[a] + EPS)
        for b in range(m):
            q = px[a] * px[b]
            if q > 0.0:
                hxy2 -= q * np.log2(q + EPS)

    # entropies of the |i-j| and i+j distributions need grouping by value
    nk = 0
    kv = np.empty(m * m)
    kp = np.empty(m * m)
    for a in range(m):
        for b in range(m):
            p = mat[a, b] / t
            if p <= 0.0:
                continue
            key = abs(u[a] - u[b])
            found = False
            for i in range(nk):
                if kv[i] == key:
                    kp[i] += p
                    found = True
                    break
            if not found:
                kv[nk] = key
                kp[nk] = p
                nk += 1
    diff_ent = 0.0
    for i in range(nk):
        diff_ent -= kp[i] * np.log2(kp[i] + EPS)

    nk = 0
    for a in range(m):
        for b in range(m):
            p = mat[a, b] / t
            if p <= 0.0:
                continue
            key = u[a] + u[b]
            found = False
            for i in range(nk):
                if kv[i] == key:
                    kp[i] += p
                    found = True
                    break
            if not found:
                kv[nk] = key
                kp[nk] = p
                nk += 1
    sum_ent = 0.0
    for i in range(nk):
        sum_ent -= kp[i] * np.log2(kp[i] + EPS)

    correlation = 0.0
    if sig > 0.0:
        correlation = corr_num / (sig * sig)
    imc1 = 0.0
    if hx > 0.0:
        imc1 = (hxy - hxy1) / hx
    imc2_in = 1.0 - np.exp(-2.0 * (hxy2 - hxy))
    imc2 = np.sqrt(imc2_in) if imc2_in > 0.0 else 0.0

    # maximal correlation coefficient over levels active in this direction
    mp = 0
    act = np.empty(m, dtype=np.int64)
    for a in range(m):
        if px[a] > 0.0:
            act[mp] = a
            mp += 1
    if mp < 2:
        mcc = 1.0
    else:
        # Q(i,j) = sum_k p(i,k) p(j,k) / (px(i) px(k)) is similar to the
        # symmetric S = D^-1/2 P D^-1/2 squared, so its spectrum is the
        # squares of S's (real) eigenvalues; MCC = second-largest |lambda|.
        sm = np.empty((mp, mp))
        for i in range(mp):
            for j in range(mp):
                sm[i, j] = (mat[act[i], act[j]] / t) / np.sqrt(
                    px[act[i]] * px[act[j]]
                )
        ev = np.linalg.eigvalsh(sm)
        evr = np.empty(mp)
        for i in range(mp):
            evr[i] = ev[i] * ev[i]
        evr = np.sort(evr)
        second = evr[mp - 2]
        # eigenvalues this small are numerically zero; sqrt would amplify
        # solver noise far above real precision
        mcc = np.sqrt(second) if second > 1e-10 else 0.0

    out[0] = autoc
    out[1] = mu
    out[2] = clus_p
    out[3] = clus_s
    out[4] = clus_t
    out[5] = contrast
    out[6] = correlation
    out[7] = diff_avg
    out[8] = diff_ent
    out[9] = diff_var
    out[10] = joint_energy
    out[11] = hxy
    out[12] = imc1
    out[13] = imc2
    out[14] = idm
    out[15] = idmn
    out[16] = idf
    out[17] = idn
    out[18] = inv_var
    out[19] = max_prob
    out[20] = sum_avg
    out[21] = sum_ent
    out[22] = sig2
    out[23] = mcc
    return count


@njit(cache=True)
def _glrlm16_dir(lev, wx, wy, m, u, dx, dy, out):
    """Run-length features for one direction (runs of equal quantized level)."""
    maxlen = wx if wx > wy else wy
    rl = np.zeros((m, maxlen + 1))
    nr = 0.0
    for x in range(wx):
        for y in range(wy):
            # only start at cells with no in-window predecessor on this line
            xp = x - dx
            yp = y - dy
            if 0 <= xp < wx and 0 <= yp < wy:
                continue
            cx, cy = x, y
            cur = lev[cx, cy]
            runlen = 0
            while 0 <= cx < wx and 0 <= cy < wy:
                g = lev[cx, cy]
                if g == cur:
                    runlen += 1
                else:
                    rl[cur, runlen] += 1.0
                    nr += 1.0
                    cur = g
                    runlen = 1
                cx += dx
                cy += dy
            rl[cur, runlen] += 1.0
            nr += 1.0

    np_vox = np.float64(wx * wy)
    sre = 0.0
    lre = 0.0
    lgl = 0.0
    hgl = 0.0
    srlgl = 0.0
    srhgl = 0.0
    lrlgl = 0.0
    lrhgl = 0.0
    re = 0.0
    mu_i = 0.0
    mu_j = 0.0
    for a in range(m):
        i2 = u[a] * u[a]
        for j in range(1, maxlen + 1):
            c = rl[a, j]
            if c <= 0.0:
                continue
            p = c / nr
            j2 = np.float64(j * j)
            sre += c / j2
            lre += c * j2
            lgl += c / i2
            hgl += c * i2
            srlgl += c / (i2 * j2)
            srhgl += c * i2 / j2
            lrlgl += c * j2 / i2
            lrhgl += c * i2 * j2
            re -= p * np.log2(p + EPS)
            mu_i += p * u[a]
            mu_j += p * j
    glv = 0.0
    rv = 0.0
    gln = 0.0
    rln = 0.0
    for a in range(m):
        rowsum = 0.0
        for j in range(1, maxlen + 1):
            c = rl[a, j]
            if c > 0.0:
                rowsum += c
                d = u[a] - mu_i
                glv += (c / nr) * d * d
                e = j - mu_j
                rv += (c / nr) * e * e
        gln += rowsum * rowsum
    for j in range(1, maxlen + 1):
        colsum = 0.0
        for a in range(m):
            colsum += rl[a, j]
        rln += colsum * colsum

    out[0] = sre / nr
    out[1] = lre / nr
    out[2] = gln / nr
    out[3] = gln / (nr * nr)
    out[4] = rln / nr
    out[5] = rln / (nr * nr)
    out[6] = nr / np_vox
    out[7] = glv
    out[8] = rv
    out[9] = re
    out[10] = lgl / nr
    out[11] = hgl / nr
    out[12] = srlgl / nr
    out[13] = srhgl / nr
    out[14] = lrlgl / nr
    out[15] = lrhgl / nr


@njit(cache=True)
def _uf_find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def _glszm16(lev, wx, wy, m, u, out, off):
    """Size-zone features; zones are 8-connected regions of equal level."""
    n = wx * wy
    parent = np.empty(n, dtype=np.int64)
    for i in range(n):
        parent[i] = i
    for x in range(wx):
        for y in range(wy):
            i = x * wy + y
            g = lev[x, y]
            # forward half of the 8-neighborhood
            for d in range(4):
                dx = DIRECTIONS[d, 0]
                dy = DIRECTIONS[d, 1]
                x2 = x + dx
                y2 = y + dy
                if 0 <= x2 < wx and 0 <= y2 < wy and lev[x2, y2] == g:
                    ri = _uf_find(parent, i)
                    rj = _uf_find(parent, x2 * wy + y2)
                    if ri != rj:
                        parent[rj] = ri

    size = np.zeros(n, dtype=np.int64)
    for i in range(n):
        size[_uf_find(parent, i)] += 1

    # aggregate zones into distinct (level, size) cells
    zl = np.empty(n, dtype=np.int64)
    zs = np.empty(n, dtype=np.int64)
    zc = np.empty(n)
    nz_cells = 0
    ns = 0.0
    for x in range(wx):
        for y in range(wy):
            i = x * wy + y
            if _uf_find(parent, i) != i:
                continue
            ns += 1.0
            a = lev[x, y]
            s = size[i]
            found = False
            for k in range(nz_cells):
                if zl[k] == a and zs[k] == s:
                    zc[k] += 1.0
                    found = True
                    break
            if not found:
                zl[nz_cells] = a
                zs[nz_cells] = s
                zc[nz_cells] = 1.0
                nz_cells += 1

    np_vox = np.float64(n)
    sae = 0.0
    lae = 0.0
    lgl = 0.0
    hgl = 0.0
    salgl = 0.0
    sahgl = 0.0
    lalgl = 0.0
    lahgl = 0.0
    ze = 0.0
    mu_i = 0.0
    mu_s = 0.0
    for k in range(nz_cells):
        c = zc[k]
        p = c / ns
        i2 = u[zl[k]] * u[zl[k]]
        s2 = np.float64(zs[k] * zs[k])
        sae += c / s2
        lae += c * s2
        lgl += c / i2
        hgl += c * i2
        salgl += c / (i2 * s2)
        sahgl += c * i2 / s2
        lalgl += c * s2 / i2
        lahgl += c * i2 * s2
        ze -= p * np.log2(p + EPS)
        mu_i += p * u[zl[k]]
        mu_s += p * zs[k]
    glv = 0.0
    zv = 0.0
    for k in range(nz_cells):
        p = zc[k] / ns
        d = u[zl[k]] - mu_i
        glv += p * d * d
        e = zs[k] - mu_s
        zv += p * e * e
    gln = 0.0
    for a in range(m):
        s = 0.0
        for k in range(nz_cells):
            if zl[k] == a:
                s += zc[k]
        gln += s * s
    szn = 0.0
    for k in range(nz_cells):
        # sum zones sharing this size; count each distinct size once
        dup = False
        for k2 in range(k):
            if zs[k2] == zs[k]:
                dup = True
                break
        if dup:
            continue
        s = 0.0
        for k2 in range(nz_cells):
            if zs[k2] == zs[k]:
                s += zc[k2]
        szn += s * s

    out[off + 0] = sae / ns
    out[off + 1] = lae / ns
    out[off + 2] = gln / ns
    out[off + 3] = gln / (ns * ns)
    out[off + 4] = szn / ns
    out[off + 5] = szn / (ns * ns)
    out[off + 6] = ns / np_vox
    out[off + 7] = glv
    out[off + 8] = zv
    out[off + 9] = ze
    out[off + 10] = lgl / ns
    out[off + 11] = hgl / ns
    out[off + 12] = salgl / ns
    out[off + 13] = sahgl / ns
    out[off + 14] = lalgl / ns
    out[off + 15] = lahgl / ns


@njit(cache=True)
def _ngtdm5(lev, wx, wy, m, u, out, off):
    """Neighborhood gray-tone difference features (8-neighborhood)."""
    s = np.zeros(m)
    cnt = np.zeros(m)
    for x in range(wx):
        for y in range(wy):
            acc = 0.0
            nb = 0
            for dx in range(-1, 2):
                for dy in range(-1, 2):
                    if dx == 0 and dy == 0:
                        continue
                    x2 = x + dx
                    y2 = y + dy
                    if 0 <= x2 < wx and 0 <= y2 < wy:
                        acc += u[lev[x2, y2]]
                        nb += 1
            if nb > 0:
                a = lev[x, y]
                s[a] += abs(u[a] - acc / nb)
                cnt[a] += 1.0

    nvp = 0.0
    for a in range(m):
        nvp += cnt[a]
    if nvp == 0.0:
        out[off + 0] = COARSENESS_CAP
        out[off + 1] = 0.0
        out[off + 2] = 0.0
        out[off + 3] = 0.0
        out[off + 4] = 0.0
        return

    ngp = 0
    for a in range(m):
        if cnt[a] > 0.0:
            ngp += 1

    coars_den = 0.0
    s_total = 0.0
    for a in range(m):
        coars_den += (cnt[a] / nvp) * s[a]
        s_total += s[a]

    contrast = 0.0
    busy_den = 0.0
    complexity = 0.0
    strength = 0.0
    for a in range(m):
        if cnt[a] <= 0.0:
            continue
        pa = cnt[a] / nvp
        for b in range(m):
            if cnt[b] <= 0.0:
                continue
            pb = cnt[b] / nvp
            d = u[a] - u[b]
            contrast += pa * pb * d * d
            busy_den += abs(u[a] * pa - u[b] * pb)
            complexity += abs(d) * (pa * s[a] + pb * s[b]) / (pa + pb)
            strength += (pa + pb) * d * d

    out[off + 0] = 1.0 / coars_den if coars_den > 0.0 else COARSENESS_CAP
    out[off + 1] = (
        contrast / (ngp * (ngp - 1.0)) * (s_total / nvp) if ngp > 1 else 0.0
    )
    out[off + 2] = coars_den / busy_den if busy_den > 0.0 else 0.0
    out[off + 3] = complexity / nvp
    out[off + 4] = strength / s_total if s_total > 0.0 else 0.0


@njit(cache=True)
def _gldm14(lev, wx, wy, m, u, out, off):
    """Dependence-matrix features (alpha=0, distance 1, 8-neighborhood)."""
    dm = np.zeros((m, 10))  # dependence size = equal neighbors + 1 <= 9
    nz = np.float64(wx * wy)
    for x in range(wx):
        for y in range(wy):
            a = lev[x, y]
            dep = 1
            for dx in range(-1, 2):
                for dy in range(-1, 2):
                    if dx == 0 and dy == 0:
                        continue
                    x2 = x + dx
                    y2 = y + dy
                    if 0 <= x2 < wx and 0 <= y2 < wy and lev[x2, y2] == a:
                        dep += 1
            dm[a, dep] += 1.0

    sde = 0.0
    lde = 0.0
    lgl = 0.0
    hgl = 0.0
    sdlgl = 0.0
    sdhgl = 0.0
    ldlgl = 0.0
    ldhgl = 0.0
    de = 0.0
    mu_i = 0.0
    mu_j = 0.0
    for a in range(m):
        i2 = u[a] * u[a]
        for j in range(1, 10):
            c = dm[a, j]
            if c <= 0.0:
                continue
            p = c / nz
            j2 = np.float64(j * j)
            sde += c / j2
            lde += c * j2
            lgl += c / i2
            hgl += c * i2
            sdlgl += c / (i2 * j2)
            sdhgl += c * i2 / j2
            ldlgl += c * j2 / i2
            ldhgl += c * i2 * j2
            de -= p * np.log2(p + EPS)
            mu_i += p * u[a]
            mu_j += p * j
    glv = 0.0
    dv = 0.0
    gln = 0.0
    dn = 0.0
    for a in range(m):
        rowsum = 0.0
        for j in range(1, 10):
            c = dm[a, j]
            if c > 0.0:
                rowsum += c
                d = u[a] - mu_i
                glv += (c / nz) * d * d
                e = j - mu_j
                dv += (c / nz) * e * e
        gln += rowsum * rowsum
    for j in range(1, 10):
        colsum = 0.0
        for a in range(m):
            colsum += dm[a, j]
        dn += colsum * colsum

    out[off + 0] = sde / nz
    out[off + 1] = lde / nz
    out[off + 2] = gln / nz
    out[off + 3] = dn / nz
    out[off + 4] = dn / (nz * nz)
    out[off + 5] = glv
    out[off + 6] = dv
    out[off + 7] = de
    out[off + 8] = lgl / nz
    out[off + 9] = hgl / nz
    out[off + 10] = sdlgl / nz
    out[off + 11] = sdhgl / nz
    out[off + 12] = ldlgl / nz
    out[off + 13] = ldhgl / nz


@njit(cache=True)
def _texture94(buf, wx, wy, bin_width, voxvol, out, off):
    """First-order + all texture families of one window -> out[off:off+94]."""
    n = wx * wy
    flat = np.empty(n)
    k = 0
    for x in range(wx):
        for y in range(wy):
            flat[k] = buf[x, y]
            k += 1
    _first_order19(flat, n, bin_width, voxvol, out, off)

    lev = np.empty((wx, wy), dtype=np.int64)
    u = np.empty(n)
    m, ng = _quantize_compact(buf, wx, wy, bin_width, lev, u)

    tmp = np.empty(N_GLCM)
    acc = np.zeros(N_GLCM)
    ndir = 0
    for d in range(4):
        cnt = _glcm24_dir(lev, wx, wy, m, u, ng, DIRECTIONS[d, 0], DIRECTIONS[d, 1], tmp)
        if cnt > 0:
            for i in range(N_GLCM):
                acc[i] += tmp[i]
            ndir += 1
    for i in range(N_GLCM):
        out[off + N_FO + i] = acc[i] / ndir if ndir > 0 else 0.0

    tmp16 = np.empty(N_GLRLM)
    acc16 = np.zeros(N_GLRLM)
    for d in range(4):
        _glrlm16_dir(lev, wx, wy, m, u, DIRECTIONS[d, 0], DIRECTIONS[d, 1], tmp16)
        for i in range(N_GLRLM):
            acc16[i] += tmp16[i]
    for i in range(N_GLRLM):
        out[off + N_FO + N_GLCM + i] = acc16[i] / 4.0

    o = off + N_FO + N_GLCM + N_GLRLM
    _glszm16(lev, wx, wy, m, u, out, o)
    o += N_GLSZM
    _ngtdm5(lev, wx, wy, m, u, out, o)
    o += N_NGTDM
    _gldm14(lev, wx, wy, m, u, out, o)


@njit(cache=True)
def _fill_window(img, x, y, z, radius, buf):
    """Copy the clipped in-plane window around (x, y, z) into buf; returns (wx, wy)."""
    nx = img.shape[0]
    ny = img.shape[1]
    x0 = x - radius if x - radius > 0 else 0
    x1 = x + radius + 1 if x + radius + 1 < nx else nx
    y0 = y - radius if y - radius > 0 else 0
    y1 = y + radius + 1 if y + radius + 1 < ny else ny
    wx = x1 - x0
    wy = y1 - y0
    for i in range(wx):
        for j in range(wy):
            buf[i, j] = img[x0 + i, y0 + j, z]
    return wx, wy


@njit(cache=True, parallel=True)
def extract_batch(t2w, adc, hbv, rdb, xpos, ypos, zpos, pzl,
                  xs, ys, zs, radius, w_t2w, w_adc, w_hbv, voxvol, out):
    """Fill one 137-wide row per voxel (parallel; rows are independent)."""
    nvox = xs.shape[0]
    side = 2 * radius + 1
    for i in prange(nvox):
        x = xs[i]
        y = ys[i]
        z = zs[i]
        buf = np.empty((side, side))
        flat = np.empty(side * side)
        wx, wy = _fill_window(t2w, x, y, z, radius, buf)
        _texture94(buf[:wx, :wy], wx, wy, w_t2w, voxvol, out[i], 0)

        wx, wy = _fill_window(adc, x, y, z, radius, buf)
        n = wx * wy
        k = 0
        for a in range(wx):
            for b in range(wy):
                flat[k] = buf[a, b]
                k += 1
        _first_order19(flat, n, w_adc, voxvol, out[i], N_T2W)

        wx, wy = _fill_window(hbv, x, y, z, radius, buf)
        n = wx * wy
        k = 0
        for a in range(wx):
            for b in range(wy):
                flat[k] = buf[a, b]
                k += 1
        _first_order19(flat, n, w_hbv, voxvol, out[i], N_T2W + N_FO)

        o = N_T2W + 2 * N_FO
        out[i, o + 0] = rdb[x, y, z]
        out[i, o + 1] = xpos[x, y, z]
        out[i, o + 2] = ypos[x, y, z]
        out[i, o + 3] = zpos[x, y, z]
        out[i, o + 4] = pzl[x, y, z]
