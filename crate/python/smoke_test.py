"""Smoke test for the hidver extension module.

Build and install first:
    pip install --no-build-isolation ./crates/py
"""

import math

import hidver


def main():
    s = hidver.ScenarioConfig()
    assert (s.c, s.delta, s.y_lim) == (100.0, 0.1, 30.0)

    bd, d = hidver.boundary_from_hidden(s, hidver.HiddenPoint(0.0, 0.0))
    assert bd.is_vertical and d.case == "w_zero"
    assert math.isclose(bd.x_intercept(), -49.5)
    assert bd.classify(-99.0, 0.0) == "-" and bd.classify(99.0, 0.0) == "+"

    h = hidver.HiddenPoint(40.0, 12.0)
    closed, _ = hidver.boundary_from_hidden(s, h)
    oracle = hidver.oracle_boundary(s, h)
    assert math.isclose(closed.slope_intercept()[0], oracle.slope_intercept()[0], rel_tol=1e-6)

    try:
        hidver.boundary_from_hidden(s, hidver.HiddenPoint(120.0, 0.0))
    except hidver.HidverError as e:
        assert "|v| < c" in str(e)
    else:
        raise AssertionError("infeasible point accepted")

    ar1, rows = hidver.alpha_table(s)
    assert abs(ar1 - 61.39) < 0.01
    alphas = [r[3] for r in rows]
    for got, want in zip(alphas, [0.0, 0.17, 0.32, 0.37, 0.40]):
        assert abs(got - want) <= 0.005, (got, want)

    plan = hidver.plan_sequence(s, 8, 7.0, 12.0)
    assert len(plan) == 8 and plan.step == 4.0
    bound_ok, union_ok, pair_ok, prefix = plan.verify()
    assert bound_ok and union_ok and pair_ok
    assert max(v for _, v in prefix) <= plan.alpha + 1e-12

    b = plan.boundaries()
    assert hidver.check_zero_transfer(s, b[0], b[1])
    assert hidver.directional_transferability(s, b[0], b[1]) == 0.0
    exact = hidver.transferability(s, b[:2], b[2])
    value, half, accepted, n = hidver.mc_transferability(s, b[:2], b[2], 200_000, seed=1)
    assert abs(value - exact) <= 3 * half, (value, exact, half)

    feasible, constraints, rec = hidver.check_boundary_feasibility(s, 7.0, 100.0)
    assert feasible and all(constraints)
    back, _ = hidver.boundary_from_hidden(s, rec)
    k, icpt = back.slope_intercept()
    assert math.isclose(k, 7.0, rel_tol=1e-9) and math.isclose(icpt, 100.0, rel_tol=1e-9)

    pool = hidver.generate_candidate_pool(s, 20, seed=3)
    steps = hidver.greedy_sequence(s, pool, b[:2], 3)
    assert len(steps) == 3
    seq = b[:2] + [pool.boundaries()[i] for i, _ in steps]
    rand_seq = [bd for _, bd in hidver.random_baseline_sequence(s, 5, 3)]
    print("greedy max AT", hidver.max_prefix_compound(s, seq))
    print("random max AT", hidver.max_prefix_compound(s, rand_seq))
    print("smoke test ok")


if __name__ == "__main__":
    main()
