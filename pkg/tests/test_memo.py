import threading

from goodseq.memo import MemoRepository


def doubling_memo(max_index=None):
    return MemoRepository(1, lambda j, m: 2 * m, max_index)


def test_extend_and_get():
    memo = doubling_memo()
    assert memo.get(3) is None
    assert memo.extend_to(5) == 16
    assert memo.get(3) == 4
    assert len(memo) == 5


def test_producer_receives_index():
    seen = []

    def producer(j, m):
        seen.append(j)
        return m * (j + 2)

    memo = MemoRepository(6, producer)
    assert memo.extend_to(4) == 6 * 3 * 4 * 5
    assert seen == [1, 2, 3]


def test_invalidate_keeps_first_value():
    memo = doubling_memo()
    memo.extend_to(10)
    assert memo.invalidate() == 9
    assert memo.prefix() == [1]
    assert memo.extend_to(4) == 8


def test_stats():
    memo = doubling_memo(max_index=50)
    memo.extend_to(8)
    memo.extend_to(3)
    stats = memo.stats()
    assert stats["entries"] == 8
    assert stats["last_bits"] == 8
    assert stats["hits"] >= 1
    assert stats["misses"] == 1
    assert stats["max_index"] == 50


def test_concurrent_extension_is_consistent():
    memo = doubling_memo()
    results = []

    def worker(j):
        results.append((j, memo.extend_to(j)))

    threads = [threading.Thread(target=worker, args=(j,)) for j in range(1, 200, 7)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(value == 2 ** (j - 1) for j, value in results)
    assert memo.prefix() == [2 ** i for i in range(len(memo))]


def test_invalidate_during_reads():
    memo = doubling_memo()
    memo.extend_to(64)
    errors = []
    stop = threading.Event()

    def reader():
        try:
            while not stop.is_set():
                for j in (1, 5, 17, 40, 64):
                    value = memo.get(j)
                    assert value is None or value == 2 ** (j - 1)
                    assert memo.extend_to(j) == 2 ** (j - 1)
        except Exception as exc:
            errors.append(exc)

    readers = [threading.Thread(target=reader) for _ in range(4)]
    for t in readers:
        t.start()
    for _ in range(200):
        memo.invalidate()
    stop.set()
    for t in readers:
        t.join()
    assert errors == []
    assert memo.prefix()[0] == 1
