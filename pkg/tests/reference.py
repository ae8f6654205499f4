"""Independent straight-from-the-formula implementations used as test oracles.

Everything here is pure Python with nested loops over nodes and communities,
deliberately sharing no code with the package.  Iteration is in ascending
node/community order so results are reproducible.
"""
import math


def out_links(arcs, u):
    return [v for (a, v) in arcs if a == u]


def in_links(arcs, u):
    return [a for (a, v) in arcs if v == u]


def und_neighbors(arcs, u):
    return sorted({v for (a, v) in arcs if a == u} | {a for (a, v) in arcs if v == u})


def zscores_by_community(values, comm):
    n = len(values)
    out = [0.0] * n
    for c in sorted(set(comm)):
        members = [u for u in range(n) if comm[u] == c]
        vals = [values[u] for u in members]
        if all(v == vals[0] for v in vals):
            continue  # all-equal community: z is 0 by definition
        mu = sum(vals) / len(vals)
        sd = math.sqrt(sum((v - mu) ** 2 for v in vals) / len(vals))
        if sd <= 1e-12 * max(abs(mu), 1.0):  # spread below rounding noise
            continue
        for u in members:
            out[u] = (values[u] - mu) / sd
    return out


def participation_node(arcs, comm, u, mode):
    if mode == "out":
        links = out_links(arcs, u)
    elif mode == "in":
        links = in_links(arcs, u)
    elif mode == "undirected":
        links = und_neighbors(arcs, u)
    else:
        raise ValueError(mode)
    d = len(links)
    if d == 0:
        return 0.0
    total = 0.0
    for c in sorted(set(comm)):
        d_i = sum(1 for v in links if comm[v] == c)
        total += (d_i / d) ** 2
    return 1.0 - total


def raw_features_node(arcs, comm, u):
    feats = {}
    own = comm[u]
    for suffix, links in (("_out", out_links(arcs, u)), ("_in", in_links(arcs, u))):
        d_int = sum(1 for v in links if comm[v] == own)
        feats["d_int" + suffix] = float(d_int)
        feats["d_ext" + suffix] = float(len(links) - d_int)
        profile = {}
        for v in links:
            if comm[v] != own:
                profile[comm[v]] = profile.get(comm[v], 0) + 1
        eps = len(profile)
        feats["eps" + suffix] = float(eps)
        if eps <= 1:
            feats["lambda" + suffix] = 0.0
        else:
            counts = [float(profile[c]) for c in sorted(profile)]
            mu = sum(counts) / eps
            feats["lambda" + suffix] = math.sqrt(sum((x - mu) ** 2 for x in counts) / eps)
    return feats


MEASURE_OF_RAW = {
    "I_int_in": "d_int_in", "I_int_out": "d_int_out",
    "I_ext_in": "d_ext_in", "I_ext_out": "d_ext_out",
    "D_in": "eps_in", "D_out": "eps_out",
    "H_in": "lambda_in", "H_out": "lambda_out",
}


def all_measures(arcs, n, comm):
    """{measure name: per-node list} for all 8 role measures."""
    raw = [raw_features_node(arcs, comm, u) for u in range(n)]
    out = {}
    for measure, base in MEASURE_OF_RAW.items():
        out[measure] = zscores_by_community([raw[u][base] for u in range(n)], comm)
    return out


def directed_modularity(arcs, n, comm):
    m = len(arcs)
    kout = [0] * n
    kin = [0] * n
    for (a, b) in arcs:
        kout[a] += 1
        kin[b] += 1
    arcset = set(arcs)
    q = 0.0
    for u in range(n):
        for v in range(n):
            if comm[u] == comm[v]:
                a_uv = 1.0 if (u, v) in arcset else 0.0
                q += a_uv - kout[u] * kin[v] / m
    return q / m


def pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def anova_f(groups):
    k = len(groups)
    ns = [len(g) for g in groups]
    total_n = sum(ns)
    means = [sum(g) / len(g) for g in groups]
    grand = sum(sum(g) for g in groups) / total_n
    ssb = sum(n_g * (m_g - grand) ** 2 for n_g, m_g in zip(ns, means))
    ssw = sum(sum((x - m_g) ** 2 for x in g) for g, m_g in zip(groups, means))
    msb = ssb / (k - 1)
    msw = ssw / (total_n - k)
    if msw == 0:
        return 0.0 if msb == 0 else math.inf
    return msb / msw


def welch_t(a, b):
    na, nb = len(a), len(b)
    ma = sum(a) / na
    mb = sum(b) / nb
    va = sum((x - ma) ** 2 for x in a) / (na - 1)
    vb = sum((x - mb) ** 2 for x in b) / (nb - 1)
    se2 = va / na + vb / nb
    t = (ma - mb) / math.sqrt(se2)
    df = se2 ** 2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return t, df


def db_index(points, labels):
    k = max(labels) + 1
    dims = len(points[0])
    clusters = [[points[i] for i in range(len(points)) if labels[i] == c] for c in range(k)]
    centroids = [tuple(sum(p[j] for p in cl) / len(cl) for j in range(dims)) for cl in clusters]
    scatter = []
    for c in range(k):
        dists = [math.dist(p, centroids[c]) for p in clusters[c]]
        scatter.append(sum(dists) / len(dists))
    total = 0.0
    for i in range(k):
        worst = 0.0
        for j in range(k):
            if i != j:
                r = (scatter[i] + scatter[j]) / math.dist(centroids[i], centroids[j])
                worst = max(worst, r)
        total += worst
    return total / k


def rand_index(a, b):
    n = len(a)
    agree = 0
    pairs = 0
    for i in range(n):
        for j in range(i + 1, n):
            pairs += 1
            same_a = a[i] == a[j]
            same_b = b[i] == b[j]
            if same_a == same_b:
                agree += 1
    return agree / pairs
