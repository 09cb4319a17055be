"""Deterministic synthetic stand-ins for the four public benchmark networks.

The real datasets live on https://snap.stanford.edu/data/ and are not bundled.
These generators produce edge files with exactly the published summary
statistics (node / edge / sign counts, see ``REFERENCE_STATS``) and dynamics
rich enough to exercise every part of the pipeline: skewed activity and
popularity, community structure, reciprocation, reputation-driven signs, and
per-node-stable rating levels.  Dropping the real SNAP files into the data
directory under the same names makes every command run on real data instead.

All generators are pure functions of their seed.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

DAY = 86400.0

# name -> (nodes, edges, positive edges, negative edges)
REFERENCE_STATS = {
    "bitcoinalpha": (3783, 24168, 22650, 1518),
    "bitcoinotc": (5881, 35592, 32029, 3563),
    "wiki-RfA": (10279, 177259, 137966, 39293),
    "email-Eu": (1005, 16064, 16064, 0),
}

FILENAMES = {
    "bitcoinalpha": "bitcoinalpha.csv",
    "bitcoinotc": "bitcoinotc.csv",
    "wiki-RfA": "wiki-RfA.csv",
    "email-Eu": "email-Eu.txt",
}

FORMATS = {
    "bitcoinalpha": "csv",
    "bitcoinotc": "csv",
    "wiki-RfA": "csv",
    "email-Eu": "events",
}


def _zipf_communities(rng, n_nodes, n_comms, alpha=1.15):
    weights = 1.0 / np.arange(1, n_comms + 1) ** alpha
    weights /= weights.sum()
    return rng.choice(n_comms, size=n_nodes, p=weights)


def _prefix_sampler(weights):
    """Cumulative-sum sampler over a growing prefix of ``weights``."""
    cum = np.cumsum(weights)

    def draw(rng, prefix_len):
        total = cum[prefix_len - 1]
        return int(np.searchsorted(cum, rng.random() * total, side="right"))

    return draw


def _trust_network(n_nodes, n_edges, n_negative, seed, span_days, n_comms=40):
    """Directed who-trusts-whom ratings with integer weights in [-10, 10] \\ {0}.

    Sequential growth process with strong temporal locality, mimicking how
    rating platforms behave: nodes arrive over time (each with a debut edge,
    so every node appears), raters act in short sprees, most targets were
    themselves active very recently, a fifth of ratings reciprocate a rating
    received moments ago, and community affinity shapes who meets whom.
    Signs follow per-node quality with noise; weights follow target quality
    plus rater generosity, so both are predictable from interaction history.
    """
    rng = np.random.default_rng(seed)
    span = span_days * DAY

    comm = _zipf_communities(rng, n_nodes, n_comms, alpha=1.05)
    activity = rng.lognormal(0.0, 1.1, n_nodes)
    popularity = rng.lognormal(0.0, 1.2, n_nodes)
    bad = rng.random(n_nodes) < 0.05
    quality = np.where(bad, rng.beta(2.0, 5.0, n_nodes), rng.beta(10.0, 2.0, n_nodes))
    generosity = rng.normal(0.0, 0.55, n_nodes)

    # arrivals front-loaded (platform launch effect), edge volume mildly growing
    arrival = span * ((np.arange(1, n_nodes + 1) / n_nodes) ** 2.4)
    # no free events before the 10th arrival so there is always a pair to draw
    n_free = n_edges - n_nodes + 1
    t0 = arrival[9]
    free_times = t0 + (span - t0) * (rng.random(n_free) ** 0.9)

    src_sampler = _prefix_sampler(activity)
    dst_sampler = _prefix_sampler(popularity)

    events = [(t, -1) for t in free_times] + [(arrival[k], k) for k in range(1, n_nodes)]
    events.sort()

    RECENT = 2500  # pool of recent events: roughly the sliding-window horizon
    PARTNERS = 24  # recent counterparties remembered per node
    used: set[int] = set()
    recent_edges: list[tuple[int, int]] = []
    recent_src: list[int] = []  # recently active raters
    recent_dst: list[int] = []  # recently rated nodes (recent pref. attachment)
    partners: dict[int, list[int]] = {}  # recent counterparties, both directions
    src_list: list[int] = []
    dst_list: list[int] = []
    ts_list: list[float] = []
    arrived = 1  # node 0 exists from the start
    last_source = -1
    last_seen = np.full(n_nodes, -(10 * RECENT), dtype=np.int64)
    clock = 0

    def key(i, j):
        return i * n_nodes + j

    def fresh(v):
        return clock - last_seen[v] <= RECENT

    def pick_source():
        u = rng.random()
        if u < 0.30 and last_source >= 0:
            return last_source  # rating spree continues
        if u < 0.70 and recent_src:
            return recent_src[rng.integers(len(recent_src))]
        if u < 0.93 and recent_dst:
            return recent_dst[rng.integers(len(recent_dst))]  # being rated prompts rating
        return src_sampler(rng, arrived)

    def pick_free_pair():
        # a fifth of ratings answer a recent rating
        if recent_edges and rng.random() < 0.20:
            for _ in range(10):
                a, b = recent_edges[rng.integers(len(recent_edges))]
                if key(b, a) not in used:
                    return b, a
        for _ in range(60):
            i = pick_source()
            j = -1
            u = rng.random()
            if u < 0.55:
                # triadic closure: meet a partner of a recent partner
                mine = partners.get(i)
                for _ in range(10):
                    if not mine:
                        break
                    x = mine[rng.integers(len(mine))]
                    theirs = partners.get(x)
                    if not theirs:
                        continue
                    cand = theirs[rng.integers(len(theirs))]
                    if cand != i and fresh(cand):
                        j = cand
                        break
            if j < 0 and u < 0.80 and recent_dst:
                for _ in range(12):
                    cand = recent_dst[rng.integers(len(recent_dst))]
                    if comm[cand] == comm[i] or rng.random() < 0.15:
                        j = cand
                        break
            if j < 0:
                for _ in range(25):
                    j = dst_sampler(rng, arrived)
                    if (comm[j] == comm[i] or rng.random() < 0.05) and (fresh(j) or rng.random() < 0.15):
                        break
            if i != j and key(i, j) not in used:
                return i, j
        # dense corner fallback: scan for any unused pair
        for i in rng.permutation(arrived):
            for j in rng.permutation(arrived):
                if i != j and key(int(i), int(j)) not in used:
                    return int(i), int(j)
        raise RuntimeError("pair space exhausted")

    for t, debut_node in events:
        if debut_node >= 0:
            arrived = max(arrived, debut_node + 1)
            # newcomers meet someone recently visible
            if recent_dst and rng.random() < 0.95:
                other = recent_dst[rng.integers(len(recent_dst))]
            else:
                other = dst_sampler(rng, debut_node)
            if rng.random() < 0.55:
                i, j = debut_node, other
            else:
                i, j = other, debut_node
            if key(i, j) in used:  # debut collision: flip direction
                i, j = j, i
        else:
            i, j = pick_free_pair()
        used.add(key(i, j))
        src_list.append(i)
        dst_list.append(j)
        ts_list.append(t)
        last_source = i
        last_seen[i] = clock
        last_seen[j] = clock
        clock += 1
        recent_src.append(i)
        recent_dst.append(j)
        recent_edges.append((i, j))
        for a, b in ((i, j), (j, i)):
            lst = partners.setdefault(a, [])
            lst.append(b)
            if len(lst) > PARTNERS:
                del lst[0]
        if len(recent_src) > RECENT:
            del recent_src[: RECENT // 5]
            del recent_dst[: RECENT // 5]
            del recent_edges[: RECENT // 5]

    src = np.asarray(src_list)
    dst = np.asarray(dst_list)
    ts = np.asarray(ts_list)

    # signs: negativity propensity from target quality, rater harshness, noise
    propensity = 2.2 * (0.42 - quality[dst]) - 0.5 * generosity[src] + 0.45 * rng.normal(size=n_edges)
    neg_idx = np.argpartition(propensity, -n_negative)[-n_negative:]
    is_neg = np.zeros(n_edges, dtype=bool)
    is_neg[neg_idx] = True

    # ratings people actually give: target-specific consensus with mild
    # rater-side variation, so history predicts magnitude
    level = np.clip(0.62 * quality[dst] + 0.14 * generosity[src] + 0.10 * rng.normal(size=n_edges) - 0.12, 0.0, 1.0)
    w_pos = np.clip(np.rint(1.0 + 9.0 * level**1.7), 1, 10)
    badness = np.clip(0.9 * (1.0 - quality[dst]) - 0.15 * generosity[src] + 0.15 * rng.normal(size=n_edges), 0.0, 1.0)
    w_neg = -np.where(badness > 0.55, 10, np.clip(np.rint(1.0 + 9.0 * badness), 1, 10))
    weight = np.where(is_neg, w_neg, w_pos).astype(np.int64)

    relabel = rng.permutation(n_nodes) + 1  # arbitrary public ids, 1-based
    order = np.argsort(ts, kind="stable")
    return relabel[src[order]], relabel[dst[order]], weight[order], np.rint(ts[order]).astype(np.int64)


def _email_network(n_nodes, n_events, seed, span_days=803, n_depts=42):
    """Unsigned email events ``SRC DST TS``; interaction counts become weights."""
    rng = np.random.default_rng(seed)
    span = span_days * DAY

    dept = _zipf_communities(rng, n_nodes, n_depts, alpha=0.9)
    activity = rng.lognormal(0.0, 1.0, n_nodes)
    act_sampler = _prefix_sampler(activity)

    # active directed pairs: mostly within-department, activity weighted
    pairs = set()
    attempts = 0
    target_pairs = int(n_events / 4.6)
    while len(pairs) < target_pairs and attempts < 60 * target_pairs:
        attempts += 1
        i = act_sampler(rng, n_nodes)
        if rng.random() < 0.82:
            members = np.flatnonzero(dept == dept[i])
            j = int(members[rng.integers(members.size)])
        else:
            j = act_sampler(rng, n_nodes)
        if i != j:
            pairs.add((i, j))
    pairs = sorted(pairs)
    rng.shuffle(pairs)

    # per-pair event counts and temporal profile (bursty or persistent)
    lam = rng.gamma(1.6, 2.6, len(pairs)) + 0.4
    counts = rng.poisson(lam)
    counts = np.maximum(counts, 1)
    persistent = rng.random(len(pairs)) < 0.35
    centers = rng.random(len(pairs)) * span
    widths = np.exp(rng.normal(np.log(0.08 * span), 0.7, len(pairs)))

    src_list, dst_list, ts_list = [], [], []
    for p, (i, j) in enumerate(pairs):
        c = counts[p]
        if persistent[p]:
            t = rng.random(c) * span
        else:
            t = np.clip(rng.normal(centers[p], widths[p], c), 0, span)
        src_list.append(np.full(c, i))
        dst_list.append(np.full(c, j))
        ts_list.append(t)

    src = np.concatenate(src_list)
    dst = np.concatenate(dst_list)
    ts = np.concatenate(ts_list)

    # every node appears: give silent nodes one departmental email each
    seen = np.zeros(n_nodes, dtype=bool)
    seen[src] = True
    seen[dst] = True
    silent = np.flatnonzero(~seen)
    extra_src, extra_dst, extra_ts = [], [], []
    for i in silent:
        members = np.flatnonzero(dept == dept[i])
        members = members[members != i]
        j = int(members[rng.integers(members.size)]) if members.size else int((i + 1) % n_nodes)
        extra_src.append(i)
        extra_dst.append(j)
        extra_ts.append(rng.random() * span)
    if silent.size:
        src = np.concatenate([src, extra_src])
        dst = np.concatenate([dst, extra_dst])
        ts = np.concatenate([ts, extra_ts])

    # trim or pad to the exact event count without silencing any node
    if src.size > n_events:
        occurrences = np.bincount(src, minlength=n_nodes) + np.bincount(dst, minlength=n_nodes)
        removable = np.flatnonzero((occurrences[src] > 1) & (occurrences[dst] > 1))
        drop = rng.choice(removable, size=src.size - n_events, replace=False)
        keep = np.ones(src.size, dtype=bool)
        keep[drop] = False
        src, dst, ts = src[keep], dst[keep], ts[keep]
    elif src.size < n_events:
        extra = rng.integers(0, len(pairs), n_events - src.size)
        add_i = np.array([pairs[e][0] for e in extra])
        add_j = np.array([pairs[e][1] for e in extra])
        add_t = rng.random(extra.size) * span
        src = np.concatenate([src, add_i])
        dst = np.concatenate([dst, add_j])
        ts = np.concatenate([ts, add_t])

    relabel = rng.permutation(n_nodes)  # 0-based public ids
    order = np.argsort(ts, kind="stable")
    return relabel[src[order]], relabel[dst[order]], np.rint(ts[order]).astype(np.int64)


def _vote_network(n_nodes, n_votes, n_negative, seed, span_days=2900):
    """Signed +-1 election votes: candidates attract bursts of voter edges."""
    rng = np.random.default_rng(seed)
    span = span_days * DAY

    activity = rng.lognormal(0.0, 1.3, n_nodes)
    faction = rng.integers(0, 6, n_nodes)
    cand_quality = rng.beta(3.2, 1.8, n_nodes)

    n_elections = 4200
    candidates = rng.choice(n_nodes, size=n_elections, replace=True)
    times = span * (rng.random(n_elections) ** 0.8)
    order = np.argsort(times)
    candidates, times = candidates[order], times[order]

    probs = activity / activity.sum()
    src_list, dst_list, ts_list, q_list = [], [], [], []
    remaining = n_votes - n_nodes  # reserve one coverage vote per node
    sizes = np.minimum(np.maximum(rng.lognormal(3.45, 0.75, n_elections), 3), 400).astype(int)
    for e in range(n_elections):
        if remaining <= 0:
            break
        v = int(min(sizes[e], remaining))
        voters = rng.choice(n_nodes, size=v, replace=False, p=probs)
        voters = voters[voters != candidates[e]]
        src_list.append(voters)
        dst_list.append(np.full(voters.size, candidates[e]))
        ts_list.append(times[e] + rng.random(voters.size) * 7 * DAY)
        q_list.append(np.full(voters.size, cand_quality[candidates[e]]))
        remaining -= voters.size

    # coverage: every node casts one vote in some election
    elec = rng.integers(0, n_elections, n_nodes)
    cov_src = np.arange(n_nodes)
    cov_dst = candidates[elec]
    fix = cov_dst == cov_src
    cov_dst[fix] = candidates[(elec[fix] + 1) % n_elections]
    src_list.append(cov_src)
    dst_list.append(cov_dst)
    ts_list.append(times[elec] + rng.random(n_nodes) * 7 * DAY)
    q_list.append(cand_quality[cov_dst])

    src = np.concatenate(src_list)
    dst = np.concatenate(dst_list)
    ts = np.concatenate(ts_list)
    qual = np.concatenate(q_list)

    if src.size < n_votes:  # top up from heavy voters
        extra = n_votes - src.size
        more_src = rng.choice(n_nodes, size=extra, p=probs)
        elec = rng.integers(0, n_elections, extra)
        more_dst = candidates[elec]
        fix = more_dst == more_src
        more_dst[fix] = candidates[(elec[fix] + 1) % n_elections]
        src = np.concatenate([src, more_src])
        dst = np.concatenate([dst, more_dst])
        ts = np.concatenate([ts, times[elec] + rng.random(extra) * 7 * DAY])
        qual = np.concatenate([qual, cand_quality[more_dst]])
    elif src.size > n_votes:
        keep = rng.choice(src.size, size=n_votes, replace=False)
        keep.sort()
        src, dst, ts, qual = src[keep], dst[keep], ts[keep], qual[keep]
        missing = np.setdiff1d(np.arange(n_nodes), np.union1d(src, dst))
        if missing.size:  # replace random votes with coverage votes
            slots = rng.choice(src.size, size=missing.size, replace=False)
            src[slots] = missing
            elec = rng.integers(0, n_elections, missing.size)
            dst[slots] = np.where(candidates[elec] == missing, candidates[(elec + 1) % n_elections], candidates[elec])
            ts[slots] = times[elec] + rng.random(missing.size) * 7 * DAY
            qual[slots] = cand_quality[dst[slots]]

    propensity = 2.1 * (0.55 - qual) + 0.35 * (faction[src] == faction[dst]) * -1.0 + 0.5 * rng.normal(size=n_votes)
    neg_idx = np.argpartition(propensity, -n_negative)[-n_negative:]
    weight = np.ones(n_votes, dtype=np.int64)
    weight[neg_idx] = -1

    relabel = rng.permutation(n_nodes) + 1
    order = np.argsort(ts, kind="stable")
    return relabel[src[order]], relabel[dst[order]], weight[order], np.rint(ts[order]).astype(np.int64)


def generate(name: str, seed: int = 20240801):
    """Return (src, dst, weight, ts) arrays for a named stand-in network."""
    nodes, edges, _pos, neg = REFERENCE_STATS[name]
    if name == "bitcoinalpha":
        return _trust_network(nodes, edges, neg, seed=seed, span_days=1900)
    if name == "bitcoinotc":
        return _trust_network(nodes, edges, neg, seed=seed + 1, span_days=1900)
    if name == "wiki-RfA":
        return _vote_network(nodes, edges, neg, seed=seed + 2)
    if name == "email-Eu":
        src, dst, ts = _email_network(nodes, edges, seed=seed + 3)
        return src, dst, np.ones(edges, dtype=np.int64), ts
    raise KeyError(f"unknown dataset name: {name}")


def write_dataset(name: str, directory, seed: int = 20240801) -> Path:
    """Write the stand-in edge file for ``name`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / FILENAMES[name]
    src, dst, weight, ts = generate(name, seed=seed)

    stats = REFERENCE_STATS[name]
    n_nodes = np.unique(np.concatenate([src, dst])).size
    n_pos = int(np.sum(weight > 0))
    n_neg = int(np.sum(weight < 0))
    got = (n_nodes, src.size, n_pos, n_neg)
    if got != stats:
        raise RuntimeError(f"{name}: generated stats {got} != reference {stats}")

    with open(path, "w", encoding="utf-8") as fh:
        if FORMATS[name] == "csv":
            for s, d, w, t in zip(src, dst, weight, ts):
                fh.write(f"{s},{d},{w},{t}\n")
        else:
            for s, d, t in zip(src, dst, ts):
                fh.write(f"{s} {d} {t}\n")
    logger.info("wrote %s (%d edges)", path, src.size)
    return path


def ensure_dataset(name: str, directory) -> Path:
    """Write the stand-in only if no file (real or synthetic) is present."""
    path = Path(directory) / FILENAMES[name]
    if path.exists():
        return path
    return write_dataset(name, directory)


def main(argv=None):
    import argparse

    parser = argparse.ArgumentParser(description="generate synthetic stand-in datasets")
    parser.add_argument("--out", default="data", help="output directory")
    parser.add_argument("--names", nargs="*", default=list(REFERENCE_STATS), choices=list(REFERENCE_STATS))
    args = parser.parse_args(argv)
    for name in args.names:
        path = write_dataset(name, args.out)
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
