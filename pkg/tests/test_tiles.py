import json
import random

import numpy as np
import pytest

from groundlab.tiles import (
    EdgeLabel,
    ForbiddenPattern,
    InputError,
    Patch,
    Tile,
    Tileset,
    check_patch,
    count_admissible,
    h_edges_match,
    log2_count_per_site,
    v_edges_match,
)


def plain(**kw):
    return EdgeLabel(**kw)


def uniform_tile(tid, **kw):
    lab = EdgeLabel(**kw)
    return Tile(tid, lab, lab, lab, lab)


def test_edge_label_encode_roundtrip():
    rng = random.Random(11)
    for _ in range(200):
        lab = EdgeLabel(
            line=rng.choice([None, "r", "b"]),
            pos=rng.choice([None, 0, 1]),
            arrow=rng.choice([None, "n", "e", "s", "w"]),
            px=rng.choice([None, 0, 1]),
            py=rng.choice([None, 0, 1]),
        )
        assert EdgeLabel.decode(lab.encode()) == lab


def test_edge_label_validation():
    with pytest.raises(InputError):
        EdgeLabel(line="g")
    with pytest.raises(InputError):
        EdgeLabel(arrow="x")
    with pytest.raises(InputError):
        EdgeLabel(px=2)
    with pytest.raises(InputError):
        EdgeLabel.decode("abc")


def test_parity_semantics():
    # px flips across a vertical edge, py flips across a horizontal edge,
    # None is unconstrained on either side
    a = plain(px=0, py=1)
    assert h_edges_match(a, plain(px=1, py=1))
    assert not h_edges_match(a, plain(px=0, py=1))
    assert not h_edges_match(a, plain(px=1, py=0))
    assert h_edges_match(a, plain(px=None, py=None))
    assert h_edges_match(plain(), plain(px=0, py=0))
    assert v_edges_match(a, plain(px=0, py=0))
    assert not v_edges_match(a, plain(px=0, py=1))


def test_line_and_arrow_must_agree_exactly():
    assert not h_edges_match(plain(line="r", pos=0), plain(line="b", pos=0))
    assert not h_edges_match(plain(line="r", pos=0), plain(line="r", pos=1))
    assert not h_edges_match(plain(line="r", pos=0), plain())
    assert not v_edges_match(plain(arrow="n"), plain(arrow="s"))
    assert v_edges_match(plain(line="b", pos=1, arrow="n"),
                         plain(line="b", pos=1, arrow="n"))


def test_tile_rotation_returns_to_start():
    t = Tile(
        "t",
        north=EdgeLabel(line="r", pos=1, arrow="n", px=0, py=1),
        east=EdgeLabel(arrow="w", px=0, py=1),
        south=EdgeLabel(line="b", pos=0, arrow="s", px=0, py=1),
        west=EdgeLabel(arrow="e", px=0, py=1),
        template="probe",
    )
    assert t.rotated(4).edges() == t.edges()
    assert t.rotated(1).rotated(3).edges() == t.edges()
    r = t.rotated(1)
    # CCW quarter turn: old east edge becomes the new north edge and the old
    # north edge becomes the new west edge with its line position kept
    assert r.north.line == t.east.line
    assert r.west.line == t.north.line
    assert r.west.pos == t.north.pos
    assert r.north.arrow == "s"  # 'w' turned a quarter CCW
    assert r.rotation == 1


def test_rotation_preserves_adjacency():
    # if A fits west of B then rotated(A) fits south of rotated(B)
    rng = random.Random(23)

    def rand_label():
        line = rng.choice([None, "r", "b"])
        return EdgeLabel(
            line=line,
            pos=rng.choice([0, 1]) if line else None,
            arrow=rng.choice([None, "n", "e", "s", "w"]),
            px=rng.choice([None, 0, 1]),
            py=rng.choice([None, 0, 1]),
        )

    def rand_tile(tid):
        return Tile(tid, rand_label(), rand_label(), rand_label(), rand_label())

    for _ in range(300):
        a, b = rand_tile("a"), rand_tile("b")
        ra, rb = a.rotated(1), b.rotated(1)
        assert h_edges_match(a.east, b.west) == v_edges_match(ra.north, rb.south)
        assert v_edges_match(a.north, b.south) == h_edges_match(rb.east, ra.west)


def parity_tileset():
    tiles = []
    for px in (0, 1):
        for py in (0, 1):
            tiles.append(uniform_tile(f"p{px}{py}", px=px, py=py))
    return Tileset(tiles)


def test_parity_tileset_counts():
    ts = parity_tileset()
    # parity forces the checkerboard phase; only the global phase is free
    for n in range(1, 5):
        r = count_admissible(ts, n)
        assert r.exact
        assert r.count == 4
    assert log2_count_per_site(count_admissible(ts, 2), 2) == pytest.approx(0.5)


def test_free_tileset_counts():
    ts = Tileset([uniform_tile(f"f{i}") for i in range(3)])
    for n in (1, 2):
        assert count_admissible(ts, n).count == 3 ** (n * n)


def test_self_incompatible_tile():
    t = Tile("s", north=plain(), east=plain(arrow="e"), south=plain(),
             west=plain(arrow="w"))
    ts = Tileset([t])
    assert count_admissible(ts, 1).count == 1
    assert count_admissible(ts, 2).count == 0


def test_count_budget():
    ts = Tileset([uniform_tile(f"f{i}") for i in range(5)])
    r = count_admissible(ts, 4, budget=10)
    assert r.budget_exceeded
    assert r.count is None and not r.exact


def test_forbidden_pattern_count():
    ts = Tileset(
        [uniform_tile("A"), uniform_tile("B")],
        extra_forbidden=[ForbiddenPattern(((0, 0, "A"), (1, 0, "A")))],
    )
    # 2x2 free count 16, minus rows containing AA: 16 - 4 - 4 + 1
    assert count_admissible(ts, 2).count == 9


def test_dp_matches_exhaustive():
    rng = random.Random(7)
    for trial in range(5):
        tiles = []
        for i in range(4):
            labs = [
                EdgeLabel(arrow=rng.choice([None, "n", "e"]))
                for _ in range(4)
            ]
            tiles.append(Tile(f"t{i}", *labs))
        dp = Tileset(tiles)
        never = ForbiddenPattern(((0, 0, "no-such-tile"),))
        slow = Tileset(tiles, extra_forbidden=[never])
        for n in (2, 3):
            a = count_admissible(dp, n)
            b = count_admissible(slow, n, budget=2_000_000)
            assert a.exact and b.exact
            assert a.count == b.count


def test_patch_construction_and_holes():
    p = Patch.from_ids([["a", None, "b"], ["b", "a", None]])
    assert p.width == 3 and p.height == 2
    assert p.id_at(0, 0) == "a"
    assert p.id_at(1, 0) is None
    assert p.id_at(1, 1) == "a"
    assert not p.filled()
    assert sorted(p.cells()) == [(0, 0, "a"), (0, 1, "b"), (1, 1, "a"), (2, 0, "b")]
    q = Patch.from_json(p.to_json())
    assert p.same_cells(q)
    sub = p.subpatch(1, 0, 2, 2)
    assert sub.origin == (1, 0)
    assert sub.id_at(0, 1) == "a"


def test_patch_out_of_range_reads_are_none():
    p = Patch.from_ids([["a"]])
    assert p.id_at(-1, 0) is None
    assert p.id_at(0, 5) is None


def test_check_patch_reports_positions():
    # A|A is fine, A|B is not: B requires arrow 'n' on its west side
    a = uniform_tile("A")
    b = uniform_tile("B", arrow="n")
    ts = Tileset([a, b])
    patch = Patch.from_ids([["A", "B"], ["A", "A"]])
    v = check_patch(ts, patch)
    kinds = {(x.kind, x.position) for x in v}
    assert ("h", (0, 0)) in kinds
    assert ("v", (1, 0)) in kinds
    # holes suspend the adjacent checks
    patch2 = Patch.from_ids([["A", None], [None, "A"]])
    assert check_patch(ts, patch2) == []


def test_check_patch_forbidden_anchor():
    a = uniform_tile("A")
    ts = Tileset([a], extra_forbidden=[ForbiddenPattern(((0, 0, "A"), (0, 1, "A")))])
    v = check_patch(ts, Patch.from_ids([["A"], ["A"], ["A"]]))
    assert [x.position for x in v if x.kind == "forbidden"] == [(0, 0), (0, 1)]


def test_check_patch_unknown_id():
    ts = Tileset([uniform_tile("A")])
    with pytest.raises(InputError):
        check_patch(ts, Patch.from_ids([["A", "zz"]]))


def test_tileset_serialization_roundtrip():
    ts = Tileset(
        [
            Tile("one", plain(line="r", pos=0, arrow="n"), plain(px=1), plain(), plain(py=0),
                 template="alpha", rotation=2),
            uniform_tile("two", arrow="s"),
        ],
        extra_forbidden=[ForbiddenPattern(((0, 0, "one"), (1, 1, "two")))],
    )
    back = Tileset.from_json(ts.to_json())
    assert [t.id for t in back.tiles] == ["one", "two"]
    assert back.tile("one").template == "alpha"
    assert back.tile("one").rotation == 2
    assert back.tile("one").north == ts.tile("one").north
    assert back.extra_forbidden == ts.extra_forbidden
    assert np.array_equal(back.h_compat, ts.h_compat)
    assert np.array_equal(back.v_compat, ts.v_compat)


def test_tileset_rejects_bad_input():
    with pytest.raises(InputError):
        Tileset([uniform_tile("x"), uniform_tile("x")])
    with pytest.raises(InputError):
        Tileset.from_json("{\"nope\": 1}")
    with pytest.raises(InputError):
        Tileset.from_json(json.dumps({"tiles": [{"id": "a"}]}))


def test_adjacency_table_matches_matrices():
    ts = parity_tileset()
    lines = [l for l in ts.adjacency_table().splitlines() if l]
    assert len(lines) == int(ts.h_compat.sum()) + int(ts.v_compat.sum())
    assert all(l.count(",") == 2 for l in lines)
