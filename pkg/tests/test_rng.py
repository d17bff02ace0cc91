from fluxq.rng import DeterministicRNG, mix64


def test_same_seed_same_stream():
    a = DeterministicRNG(12345)
    b = DeterministicRNG(12345)
    assert [a.next_u64() for _ in range(20)] == [b.next_u64() for _ in range(20)]


def test_different_seeds_differ():
    assert DeterministicRNG(1).next_u64() != DeterministicRNG(2).next_u64()


def test_random_in_unit_interval():
    rng = DeterministicRNG(7)
    values = [rng.random() for _ in range(1000)]
    assert all(0.0 <= v < 1.0 for v in values)
    assert 0.4 < sum(values) / len(values) < 0.6


def test_randrange_covers_range_uniformly():
    rng = DeterministicRNG(11)
    counts = [0] * 5
    for _ in range(5000):
        counts[rng.randrange(5)] += 1
    assert all(800 < c < 1200 for c in counts)


def test_shuffle_is_permutation():
    rng = DeterministicRNG(3)
    items = list(range(10))
    rng.shuffle(items)
    assert sorted(items) == list(range(10))


def test_split_is_stable_and_independent_of_consumption():
    master = DeterministicRNG(99)
    child_before = master.split(4).next_u64()
    master.random()  # consume the parent stream
    child_after = master.split(4).next_u64()
    assert child_before == child_after
    assert master.split(4).seed == mix64((mix64(99) + 5 * 0x9E3779B97F4A7C15) & ((1 << 64) - 1))


def test_split_children_differ():
    master = DeterministicRNG(99)
    seeds = {master.split(k).seed for k in range(100)}
    assert len(seeds) == 100
