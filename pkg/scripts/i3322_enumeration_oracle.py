"""Recompute the frozen I3322 constants by brute force.

Enumerates all 256 deterministic strategy pairs for the classical bound and
scans the full-knowledge corners directly, independent of the LP.
"""

from bellasym.game_model import builtin_game
from bellasym.lhv_core import classical_bound_bruteforce


def corner(g, know_a: bool, know_b: bool) -> float:
    """Best value when Bob also sees x (know_a), Alice also sees y (know_b), or both."""
    n_a, n_b = g.n_settings_a, g.n_settings_b
    if know_a and know_b:
        return float(g.coeff.max(axis=(1, 3)).mean())
    if know_a:
        # Alice answers from x alone; Bob sees x, y and Alice's answer
        return float(sum(max(g.coeff[x, a].max(axis=1).sum() for a in range(g.n_outcomes_a))
                   for x in range(n_a)) / (n_a * n_b))
    if know_b:
        return float(sum(max(g.coeff[:, :, y, b].max(axis=1).sum() for b in range(g.n_outcomes_b))
                   for y in range(n_b)) / (n_a * n_b))
    return classical_bound_bruteforce(g)[0]


def main():
    g = builtin_game("i3322")
    value, strat = classical_bound_bruteforce(g)
    print(f"classical bound {value!r} at alice={strat.alice} bob={strat.bob}")
    print(f"full knowledge of x: {corner(g, True, False)!r}")
    print(f"full knowledge of y: {corner(g, False, True)!r}")
    print(f"full knowledge of both: {corner(g, True, True)!r}")


if __name__ == "__main__":
    main()
