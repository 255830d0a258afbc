"""Vectorized numpy implementation of the per-epoch kernel.

Within one epoch there is no read/write conflict: topic queries read only
observations from earlier epochs, so the whole epoch batches into an
eligibility/winner phase over all visits followed by an observation phase.
"""

from __future__ import annotations

import numpy as np

from ..hashing import STICKY, WINNER, hash_path_arr
from ..topics import select_top_topics

NAME = "numpy"


def _ragged_indices(starts: np.ndarray, lens: np.ndarray) -> np.ndarray:
    """Flat indices for concatenated slices [starts[i], starts[i]+lens[i])."""
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    ends = np.cumsum(lens)
    offsets = np.repeat(ends - lens, lens)
    return np.repeat(starts, lens) + (np.arange(total, dtype=np.int64) - offsets)


def epoch_step(
    visits: np.ndarray,
    site_net_off: np.ndarray,
    site_net_ids: np.ndarray,
    site_topic_off: np.ndarray,
    site_topic_ids: np.ndarray,
    interest: np.ndarray,
    tops_vals: np.ndarray,
    tops_len: np.ndarray,
    seen_ever: np.ndarray,
    seen_bits: np.ndarray,
    use_bits: bool,
    any_scope: bool,
    epoch: int,
    topic_window: int,
    ads: int,
    top_n: int,
    seed: int,
    user_id: int,
    counting: bool,
    strict_lowcomp: bool,
    net_present: np.ndarray,
    net_eligible: np.ndarray,
    net_lowcomp: np.ndarray,
    net_sole: np.ndarray,
    select_tops: bool,
):
    num_networks, taxonomy = interest.shape
    pages = visits.shape[0]

    if use_bits and num_networks:
        seen_bits &= np.uint8(0xFF ^ (1 << (epoch % 8)))

    starts = site_net_off[visits]
    npre = (site_net_off[visits + 1] - starts).astype(np.int64)
    nets_flat = site_net_ids[_ragged_indices(starts, npre)]
    row_off = np.zeros(pages + 1, dtype=np.int64)
    np.cumsum(npre, out=row_off[1:])
    pos_flat = np.repeat(np.arange(pages, dtype=np.int64), npre)

    # Phase A: eligibility from past-epoch state only.
    elig_flat = np.zeros(nets_flat.shape[0], dtype=bool)
    wlo = max(1, epoch - topic_window)
    for w in range(wlo, epoch):
        length = int(tops_len[w])
        if length <= 0:
            continue
        h = hash_path_arr(seed, STICKY, user_id, visits, w)
        cand = tops_vals[w, (h % np.uint64(length)).astype(np.int64)]
        cand_row = cand[pos_flat]
        ok = interest[nets_flat, cand_row]
        if any_scope:
            ok &= seen_ever[nets_flat, cand_row]
        else:
            ok &= (seen_bits[nets_flat, cand_row] & np.uint8(1 << (w % 8))) != 0
        elig_flat |= ok

    n_elig = np.bincount(pos_flat[elig_flat], minlength=pages).astype(np.int64)

    winners = np.full(pages * ads, -1, dtype=np.int64)
    filled_pages = np.flatnonzero(n_elig > 0)
    if filled_pages.size:
        elig_nets = nets_flat[elig_flat]  # CSR order: ascending net id per page
        e_off = np.zeros(pages + 1, dtype=np.int64)
        np.cumsum(n_elig, out=e_off[1:])
        pos_rep = np.repeat(filled_pages, ads)
        site_rep = visits[pos_rep]
        k_tile = np.tile(np.arange(ads, dtype=np.int64), filled_pages.size)
        h = hash_path_arr(seed, WINNER, user_id, epoch, site_rep, k_tile)
        draw = (h % n_elig[pos_rep].astype(np.uint64)).astype(np.int64)
        winners[pos_rep * ads + k_tile] = elig_nets[e_off[pos_rep] + draw]

    filled = 0
    total = 0
    if counting:
        total = pages * ads
        filled = int(filled_pages.size) * ads
        net_present += np.bincount(nets_flat, minlength=num_networks) * ads
        net_eligible += np.bincount(nets_flat[elig_flat], minlength=num_networks) * ads
        fewer = (n_elig < npre)[pos_flat]
        if not strict_lowcomp:
            fewer |= (npre == 1)[pos_flat]
        net_lowcomp += np.bincount(nets_flat[elig_flat & fewer], minlength=num_networks) * ads
        sole = elig_flat & (n_elig == 1)[pos_flat]
        net_sole += np.bincount(nets_flat[sole], minlength=num_networks) * ads

    # Phase B: observations and the epoch histogram.
    t_starts = site_topic_off[visits]
    ntop = (site_topic_off[visits + 1] - t_starts).astype(np.int64)
    topics_flat = site_topic_ids[_ragged_indices(t_starts, ntop)]
    hist = np.bincount(topics_flat, minlength=taxonomy).astype(np.int64)

    n_new = 0
    if nets_flat.size:
        pair_lens = ntop[pos_flat]
        net_rep = np.repeat(nets_flat, pair_lens)
        pair_idx = _ragged_indices(t_starts[pos_flat], pair_lens)
        topic_rep = site_topic_ids[pair_idx]
        codes = np.unique(net_rep * taxonomy + topic_rep)
        fresh = ~seen_ever.reshape(-1)[codes]
        n_new = int(fresh.sum())
        seen_ever.reshape(-1)[codes] = True
        if use_bits:
            seen_bits.reshape(-1)[codes] |= np.uint8(1 << (epoch % 8))

    if select_tops:
        top = select_top_topics(hist, seed, user_id, epoch, top_n)
        tops_len[epoch] = top.shape[0]
        tops_vals[epoch, : top.shape[0]] = top

    return filled, total, n_new, row_off, nets_flat, elig_flat, winners, hist
