"""Jit-compiled implementation of the per-epoch kernel.

Mirrors :mod:`topicsim.kernels.numpy_backend` exactly; equality of the two
backends is asserted in the test suite.  All hash arithmetic reproduces
:func:`topicsim.hashing.hash_path` bit for bit in uint64 space.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"

_U = np.uint64
_S33 = _U(33)
_M1 = _U(0xFF51AFD7ED558CCD)
_M2 = _U(0xC4CEB9FE1A85EC53)
_PHI = _U(0x9E3779B97F4A7C15)
_TWEAK = _U(0x243F6A8885A308D3)
_STICKY = _U(1)
_TIE = _U(2)
_WINNER = _U(3)
_COUNT_CAP = _U(1 << 20)
_SH44 = _U(44)
_SH20 = _U(20)


@njit(inline="always")
def _fmix64(z):
    z ^= z >> _S33
    z *= _M1
    z ^= z >> _S33
    z *= _M2
    z ^= z >> _S33
    return z


@njit(inline="always")
def _hp4(seed, a, b, c, d):
    h = _fmix64(seed ^ _TWEAK)
    h = _fmix64((h + _PHI) ^ a)
    h = _fmix64((h + _PHI) ^ b)
    h = _fmix64((h + _PHI) ^ c)
    h = _fmix64((h + _PHI) ^ d)
    return h


@njit(inline="always")
def _hp5(seed, a, b, c, d, e):
    h = _fmix64(seed ^ _TWEAK)
    h = _fmix64((h + _PHI) ^ a)
    h = _fmix64((h + _PHI) ^ b)
    h = _fmix64((h + _PHI) ^ c)
    h = _fmix64((h + _PHI) ^ d)
    h = _fmix64((h + _PHI) ^ e)
    return h


@njit(cache=True, nogil=True)
def _epoch_step(
    visits,
    site_net_off,
    site_net_ids,
    site_topic_off,
    site_topic_ids,
    interest,
    tops_vals,
    tops_len,
    seen_ever,
    seen_bits,
    use_bits,
    any_scope,
    epoch,
    topic_window,
    ads,
    top_n,
    seed,
    user_id,
    counting,
    strict_lowcomp,
    net_present,
    net_eligible,
    net_lowcomp,
    net_sole,
    select_tops,
):
    num_networks, taxonomy = interest.shape
    pages = visits.shape[0]
    seed_u = _U(seed)
    user_u = _U(user_id)
    epoch_u = _U(epoch)

    if use_bits:
        clear = np.uint8(0xFF ^ (1 << (epoch % 8)))
        for n in range(num_networks):
            for t in range(taxonomy):
                seen_bits[n, t] &= clear

    total_rows = 0
    for i in range(pages):
        s = visits[i]
        total_rows += site_net_off[s + 1] - site_net_off[s]

    row_off = np.empty(pages + 1, dtype=np.int64)
    nets_flat = np.empty(total_rows, dtype=np.int64)
    elig_flat = np.zeros(total_rows, dtype=np.bool_)
    winners = np.full(pages * ads, -1, dtype=np.int64)
    hist = np.zeros(taxonomy, dtype=np.int64)
    ebuf = np.empty(num_networks if num_networks > 0 else 1, dtype=np.int64)
    cand = np.empty(topic_window, dtype=np.int64)
    cand_bit = np.empty(topic_window, dtype=np.uint8)

    wlo = epoch - topic_window
    if wlo < 1:
        wlo = 1

    filled = 0
    total = 0
    pos = 0
    row_off[0] = 0
    for i in range(pages):
        s = visits[i]
        a0 = site_net_off[s]
        a1 = site_net_off[s + 1]
        npre = a1 - a0

        ncand = 0
        for w in range(wlo, epoch):
            length = tops_len[w]
            if length <= 0:
                continue
            h = _hp4(seed_u, _STICKY, user_u, _U(s), _U(w))
            cand[ncand] = tops_vals[w, int(h % _U(length))]
            cand_bit[ncand] = np.uint8(1 << (w % 8))
            ncand += 1

        k_elig = 0
        row_start = pos
        for j in range(a0, a1):
            n = site_net_ids[j]
            ok = False
            for q in range(ncand):
                c = cand[q]
                if interest[n, c]:
                    if any_scope:
                        if seen_ever[n, c]:
                            ok = True
                            break
                    elif seen_bits[n, c] & cand_bit[q]:
                        ok = True
                        break
            nets_flat[pos] = n
            elig_flat[pos] = ok
            if ok:
                ebuf[k_elig] = n
                k_elig += 1
            pos += 1
        row_off[i + 1] = pos

        base = i * ads
        if k_elig > 0:
            for k in range(ads):
                h = _hp5(seed_u, _WINNER, user_u, epoch_u, _U(s), _U(k))
                winners[base + k] = ebuf[int(h % _U(k_elig))]

        if counting:
            total += ads
            if k_elig > 0:
                filled += ads
            for j in range(a0, a1):
                net_present[site_net_ids[j]] += ads
            fewer = (k_elig < npre) or (npre == 1 and not strict_lowcomp)
            for j in range(a0, a1):
                if elig_flat[row_start + (j - a0)]:
                    n = site_net_ids[j]
                    net_eligible[n] += ads
                    if fewer:
                        net_lowcomp[n] += ads
                    if k_elig == 1:
                        net_sole[n] += ads

    # Observations become visible to queries from the next epoch on.
    n_new = 0
    bit = np.uint8(1 << (epoch % 8))
    for i in range(pages):
        s = visits[i]
        t0 = site_topic_off[s]
        t1 = site_topic_off[s + 1]
        for tt in range(t0, t1):
            hist[site_topic_ids[tt]] += 1
        a0 = site_net_off[s]
        a1 = site_net_off[s + 1]
        for j in range(a0, a1):
            n = site_net_ids[j]
            for tt in range(t0, t1):
                t = site_topic_ids[tt]
                if not seen_ever[n, t]:
                    n_new += 1
                    seen_ever[n, t] = True
                if use_bits:
                    seen_bits[n, t] |= bit

    # Top-N selection: repeated minimum over the packed (count, tie, topic)
    # key.  Skipped when the caller derives tops from an accumulated histogram.
    if select_tops:
        n_top = 0
        for _rank in range(top_n):
            best_key = _U(0xFFFFFFFFFFFFFFFF)
            best_t = -1
            for t in range(taxonomy):
                c = hist[t]
                if c <= 0:
                    continue
                taken = False
                for r in range(n_top):
                    if tops_vals[epoch, r] == t:
                        taken = True
                        break
                if taken:
                    continue
                th = _hp4(seed_u, _TIE, user_u, epoch_u, _U(t))
                key = ((_COUNT_CAP - _U(c)) << _SH44) | (th >> _SH20)
                if best_t < 0 or key < best_key or (key == best_key and t < best_t):
                    best_key = key
                    best_t = t
            if best_t < 0:
                break
            tops_vals[epoch, n_top] = best_t
            n_top += 1
        tops_len[epoch] = n_top

    return filled, total, n_new, row_off, nets_flat, elig_flat, winners, hist


def epoch_step(*args):
    return _epoch_step(*args)
