"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written from first principles (pure
Python, brute force, exhaustive enumeration) and must not import the
implementation modules it checks.
"""

import itertools
import math


def pearson_two_pass(x, y):
    """Textbook two-pass product-moment correlation."""
    n = len(x)
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    sxy = sum((a - mean_x) * (b - mean_y) for a, b in zip(x, y))
    sxx = sum((a - mean_x) ** 2 for a in x)
    syy = sum((b - mean_y) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def population_std_two_pass(values):
    """Two-pass population standard deviation."""
    n = len(values)
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / n)


def has_cycle_dfs(nodes, arcs):
    """Recursive three-color DFS cycle check, independent of the package's."""
    adjacency = {node: [] for node in nodes}
    for source, target in arcs:
        adjacency[source].append(target)
    state = {node: 0 for node in nodes}

    def visit(node):
        state[node] = 1
        for child in adjacency[node]:
            if state[child] == 1:
                return True
            if state[child] == 0 and visit(child):
                return True
        state[node] = 2
        return False

    return any(state[node] == 0 and visit(node) for node in nodes)


def brute_force_cover(paths, node_set, p_max, p_hat_max):
    """Exhaustive subset enumeration; returns the optimal objective or None."""
    best = None
    n = len(paths)
    for mask in range(1 << n):
        size = bin(mask).count("1")
        if best is not None and size >= best:
            continue
        counts = {node: 0 for node in node_set}
        for w in range(n):
            if mask >> w & 1:
                for node in paths[w]:
                    if node in counts:
                        counts[node] += 1
        if all(p_max <= counts[node] <= p_hat_max for node in node_set):
            best = size
    return best


def brute_force_lex_min_cover(paths, node_set, p_max, p_hat_max):
    """Lexicographically smallest optimal index set by direct enumeration."""
    objective = brute_force_cover(paths, node_set, p_max, p_hat_max)
    if objective is None:
        return None
    for combo in itertools.combinations(range(len(paths)), objective):
        counts = {node: 0 for node in node_set}
        for w in combo:
            for node in paths[w]:
                if node in counts:
                    counts[node] += 1
        if all(p_max <= counts[node] <= p_hat_max for node in node_set):
            return combo
    return None


def exhaustive_shift_feasible(requirements, capacities, pairs, xi, theta, max_requirement=6):
    """Breadth-first search over every admissible unit-shift sequence.

    requirements/capacities/xi: dict capability -> int; pairs: set of
    frozenset pairs that are conjugated. Returns True when some reachable
    requirement state satisfies both fuzzy clauses.
    """
    def feasible(reqs):
        total = 0
        for cap, req in reqs.items():
            delta = req - capacities[cap]
            if delta > xi.get(cap, 0):
                return False
            if delta > 0:
                total += delta
        return total <= theta

    order = sorted(requirements)
    start = tuple(requirements[cap] for cap in order)
    queue = [start]
    seen = {start}
    while queue:
        state = queue.pop()
        reqs = dict(zip(order, state))
        if feasible(reqs):
            return True
        for deficient in order:
            if reqs[deficient] - capacities[deficient] <= 0 or reqs[deficient] <= 0:
                continue
            for reserve in order:
                if reserve == deficient:
                    continue
                if frozenset((deficient, reserve)) not in pairs:
                    continue
                if reqs[reserve] - capacities[reserve] >= 0:
                    continue
                if reqs[reserve] >= max_requirement:
                    continue
                if reqs[reserve] + 1 - capacities[reserve] > xi.get(reserve, 0):
                    continue
                nxt = dict(reqs)
                nxt[deficient] -= 1
                nxt[reserve] += 1
                key = tuple(nxt[cap] for cap in order)
                if key not in seen:
                    seen.add(key)
                    queue.append(key)
    return False


def ks_distance_from_uniform(samples):
    """Kolmogorov-Smirnov distance of samples from U(0, 1)."""
    ordered = sorted(samples)
    n = len(ordered)
    d = 0.0
    for i, value in enumerate(ordered):
        d = max(d, (i + 1) / n - value, value - i / n)
    return d
