"""Pure-Python query kernels; same entry points as the compiled ``_kernels`` module."""

import math

import numpy as np

LLR_CLIP = 40.0


def first_partition(total, parts, n, lo=0):
    """Lexicographically smallest ascending ``parts``-tuple of distinct integers
    in ``(lo, n]`` summing to ``total``, or ``None``."""
    out = []
    prev = lo
    remaining = total
    for m in range(parts, 0, -1):
        # smallest x > prev leaving a feasible tail of m-1 parts > x, <= n
        tail_max = (m - 1) * n - (m - 1) * (m - 2) // 2
        x = max(prev + 1, remaining - tail_max)
        if m == 1:
            if x != remaining or x > n:
                return None
        elif x * m + m * (m - 1) // 2 > remaining or x > n:
            return None
        out.append(x)
        prev = x
        remaining -= x
    return out


def next_partition(a, n):
    """Lexicographic successor of ``a`` among distinct-part partitions with the same
    sum, part count and bound ``n``; ``None`` when ``a`` is the last one."""
    w = len(a)
    for i in range(w - 2, -1, -1):
        head = a[:i]
        v = a[i] + 1
        rest = sum(a[i:]) - v
        tail = first_partition(rest, w - 1 - i, n, v)
        if tail is not None:
            return head + [v] + tail
    return None


def rank_sets(n, parity=None):
    """Yield flipped rank-sets (1-based ranks) in 1-line ORBGRAND order.

    Order is by logistic weight, then Hamming weight, then lexicographic
    rank-set.  ``parity`` restricts the Hamming weight to ``0`` (even) or
    ``1`` (odd).
    """
    if parity != 1:
        yield []
    for total in range(1, n * (n + 1) // 2 + 1):
        w = 1
        while w * (w + 1) // 2 <= total:
            if (parity is None or w % 2 == parity) and total <= w * n - w * (w - 1) // 2:
                a = first_partition(total, w, n)
                while a is not None:
                    yield a
                    a = next_partition(a, n)
            w += 1


def reliability_order(llr):
    return np.argsort(np.abs(llr), kind="stable")


def list_decode(llr, hcols, even, target_l, budget, threshold, k, parity_skip=True):
    """ORBGRAND list decode of one soft word.

    Returns ``(codewords, q, probs, cum_prob, parity_mass, queries, abandoned, parity_filtered)``.
    ``hcols`` are the packed parity-check columns of the code.
    """
    llr = np.clip(np.asarray(llr, dtype=np.float64), -LLR_CLIP, LLR_CLIP)
    n = llr.shape[0]
    mag = np.abs(llr)
    y = (llr < 0).astype(np.uint8)
    order = reliability_order(llr)
    hc = [int(h) for h in hcols]
    s0 = 0
    for j in range(n):
        if y[j]:
            s0 ^= hc[j]
    base = float(np.prod(1.0 / (1.0 + np.exp(-mag))))
    filtered = bool(even and parity_skip)
    parity = int(y.sum() % 2) if filtered else None
    if filtered:
        flip = 1.0 / (1.0 + np.exp(mag))
        prod = float(np.prod(1.0 - 2.0 * flip))
        parity_mass = 0.5 * (1.0 + (prod if parity == 0 else -prod))
        phi = (2.0 ** k - 1.0) / (2.0 ** (n - 1) - 1.0)
    else:
        parity_mass = 1.0
        phi = (2.0 ** k - 1.0) / (2.0 ** n - 1.0)
    ord_mag = mag[order].tolist()
    ord_h = [hc[i] for i in order]

    words, qs, probs = [], [], []
    cum = 0.0
    queries = 0
    abandoned = False
    for ranks in rank_sets(n, parity):
        if queries >= budget:
            abandoned = True
            break
        queries += 1
        s = s0
        e = 0.0
        for r in ranks:
            s ^= ord_h[r - 1]
            e += ord_mag[r - 1]
        p = base * math.exp(-e)
        cum += p
        if s == 0:
            word = y.copy()
            for r in ranks:
                word[order[r - 1]] ^= 1
            words.append(word)
            qs.append(queries)
            probs.append(p)
            if len(words) >= target_l:
                break
            if threshold > 0.0:
                resid = max(parity_mass - cum, 0.0) * phi
                if resid / (sum(probs) + resid) < threshold:
                    break
    return words, qs, probs, cum, parity_mass, queries, abandoned, filtered


def siso_rows(llr_rows, hcols, even, k, target_l, budget, threshold, parity_skip=True):
    """Row-batched SOGRAND soft-in soft-out decode.

    Returns ``(app, queries, found)``: APP LLRs per row, queries per row and
    list size per row.
    """
    llr_rows = np.asarray(llr_rows, dtype=np.float64)
    m, n = llr_rows.shape
    app = np.empty_like(llr_rows)
    queries = np.zeros(m, dtype=np.int64)
    found = np.zeros(m, dtype=np.int64)
    for r in range(m):
        row = np.clip(llr_rows[r], -LLR_CLIP, LLR_CLIP)
        words, _, probs, cum, pmass, q, _, filtered = list_decode(
            row, hcols, even, target_l, budget, threshold, k, parity_skip
        )
        queries[r] = q
        found[r] = len(words)
        app[r] = bitwise_app(row, words, probs, cum, pmass, n, k, filtered)
    return app, queries, found


def bitwise_app(llr, words, probs, cum, parity_mass, n, k, filtered):
    llr = np.asarray(llr, dtype=np.float64)
    if not words:
        return llr.copy()
    if filtered:
        phi = (2.0 ** k - 1.0) / (2.0 ** (n - 1) - 1.0)
    else:
        phi = (2.0 ** k - 1.0) / (2.0 ** n - 1.0)
    resid = max(parity_mass - cum, 0.0) * phi
    denom = sum(probs) + resid
    if denom <= 0.0:
        return llr.copy()
    pb = np.asarray(probs) / denom
    pa = resid / denom
    W = np.asarray(words, dtype=np.uint8)
    p1 = pb @ W
    p0 = pb.sum() - p1
    num = p0 + pa / (1.0 + np.exp(-llr))
    den = p1 + pa / (1.0 + np.exp(llr))
    out = np.empty(n)
    for j in range(n):
        if num[j] <= 0.0:
            out[j] = -LLR_CLIP
        elif den[j] <= 0.0:
            out[j] = LLR_CLIP
        else:
            out[j] = math.log(num[j]) - math.log(den[j])
    return out
