"""Quick end-to-end check of the ordmms extension module."""

import ordmms


def main():
    assert set(ordmms.fixtures()) >= {"three-agents", "balanced-tightness"}

    inst = ordmms.Instance.fixture("three-agents")
    assert (inst.n, inst.m) == (3, 6)

    shares = [ordmms.bbfs(row, inst.n)[0] for row in inst.values]
    assert shares == [9, 11, 10], shares

    alloc = ordmms.bbfs_allocation(inst)
    assert alloc.bundles == [[0], [1, 4, 5], [2, 3]], alloc
    assert alloc.values == [10, 13, 11]

    value, partition = ordmms.mms_exact(inst, 0, 1, 3)
    assert value == min(inst.bundle_value(0, p) for p in partition)

    for ell in (1, 2):
        sol = ordmms.solve_ordinal(inst, ell)
        assert all(v >= g for v, g in zip(sol.values, sol.guarantees)), sol
        goods = sorted(g for b in sol.bundles for g in b)
        assert goods == list(range(inst.m))

    again = ordmms.Instance.from_json(inst.to_json())
    assert again.values == inst.values

    # agents 0 and 1 compete for part 0, so only agent 2 can be matched
    assert ordmms.envy_free_matching(3, 2, [(0, 0), (1, 0), (2, 1)]) == [(2, 1)]
    assert ordmms.verify_counterexample(2)

    try:
        ordmms.Instance([[1, 2], [3]])
    except ValueError:
        pass
    else:
        raise AssertionError("ragged instance accepted")

    print("ordmms smoke test passed")


if __name__ == "__main__":
    main()
