#!/usr/bin/env python3
"""Smoke test for the evconj extension module.

Builds nothing itself: expects `cargo build -p evconj-py` (or --release) to
have produced target/<profile>/libevconj.so. The script links the library
into a temp directory under the importable name and drives the worked
examples end to end.
"""

import json
import os
import shutil
import sys
import tempfile


def locate_extension():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    names = {
        "linux": "libevconj.so",
        "darwin": "libevconj.dylib",
        "win32": "evconj.dll",
    }
    libname = names.get(sys.platform, "libevconj.so")
    for profile in ("debug", "release"):
        cand = os.path.join(root, "target", profile, libname)
        if os.path.exists(cand):
            return cand
    sys.exit("build the extension first: cargo build -p evconj-py")


def import_evconj():
    lib = locate_extension()
    tmp = tempfile.mkdtemp(prefix="evconj-py-")
    target = os.path.join(tmp, "evconj.so" if sys.platform != "win32" else "evconj.pyd")
    shutil.copyfile(lib, target)
    sys.path.insert(0, tmp)
    import evconj

    return evconj


def main():
    ev = import_evconj()

    # the golden mean graph: loop e at v, f: v -> w, g: w -> v
    gm = ev.Graph(["v", "w"], [("e", "v", "v"), ("f", "v", "w"), ("g", "w", "v")])
    assert gm.sinks() == [] and gm.sources() == []
    assert gm.paths_of_length(2) == [
        ["e", "e"], ["e", "f"], ["f", "g"], ["g", "e"], ["g", "f"],
    ]
    a = gm.adjacency(order=["v", "w"])
    assert a.entries() == [[1, 1], [1, 0]]
    assert a.determinant() == -1
    assert "digraph G {" in gm.dot()

    # out-split at v with {e} | {f}: the three-vertex presentation
    rec = ev.out_split(gm, "v", [["e"], ["f"]])
    split = rec.result
    assert split.vertex_count() == 3 and split.edge_count() == 5
    assert rec.division.entries() == [[1, 1, 0], [0, 0, 1]]
    assert rec.edge_matrix.entries() == [[1, 0], [0, 1], [1, 0]]
    assert rec.division.is_division()
    # factorization identities
    assert rec.division.mul(rec.edge_matrix) == gm.adjacency()
    assert rec.edge_matrix.mul(rec.division) == split.adjacency()

    # in-split with an empty cell produces exactly one source
    rec2 = ev.in_split(gm, "v", [["e", "g"], []])
    assert rec2.result.sources() == ["v#2"]

    # round trip through the matrix reconstruction
    back = ev.matrices_to_split(gm, rec.division, rec.edge_matrix, "out")
    assert back.cells == rec.cells

    # the eventually-but-not-conjugate pair from a one-step balanced split
    tail = ev.Graph(["u", "v"], [("f", "u", "v"), ("e", "v", "v")])
    script = ev.Script(tail)
    script.add_step("v", [["e", "f"], []], [["f"], ["e"]])
    e_branch, f_branch = script.run()
    assert e_branch.isomorphism_to(f_branch) is None

    psi = script.psi()
    assert (psi.memory, psi.anticipation) == (1, 0)
    assert psi.table_is_bijective()
    assert psi.check_sliding(6)
    assert psi.conditions_pass(4, 4)
    assert psi.apply(["f#1", "e#1", "e#1"]) == ["f#1", "e#1", "e#2"]

    # bounded decision between the branch adjacency matrices
    ae, af = e_branch.adjacency(), f_branch.adjacency()
    triple = ev.decide_balanced_elementary(ae, af, m=2, cap=1)
    assert triple is not None
    assert ev.verify_balanced_elementary(ae, af, triple)
    screens = json.loads(ev.necessary_invariants(ae, af, 3))
    assert screens["det_equal"]

    # the (1,1)-block map of the triple slides and is bijective in the
    # condition sense
    tm = ev.block_map_from_triple(e_branch, f_branch, triple)
    assert (tm.memory, tm.anticipation) == (1, 1)
    assert tm.check_sliding(6)
    g2, reduced = ev.reduce_continuity(tm)
    assert reduced.anticipation == 0 and g2.vertex_count() > 0

    # full witness with certificate
    w = script.witness()
    assert w.verify(6)
    cert = w.certificate
    assert cert is not None and len(cert) == 1 and cert.verify()
    doc = json.loads(w.to_json())
    assert doc["reports"]["roundtrip_ok"] is True

    # matrix-search witness between the two branches
    w2 = ev.witness_from_matrices(e_branch, f_branch, 1)
    assert w2 is not None and w2.verify(7)

    # decompose the constructive conjugacy back into its ladder
    back_psi = script.psi(reverse=True)
    base, summary = ev.decompose_eventual_conjugacy(psi, back_psi)
    assert base.isomorphism_to(tail) is not None
    assert json.loads(summary)["e_top_matches_higher_block"] is True

    # the non-transitive ends connect only at depth two
    a_e = ev.Matrix([[1, 1, 0], [0, 1, 1], [1, 1, 0]])
    a_g = ev.Matrix([[0, 2, 0], [0, 2, 0], [0, 2, 0]])
    assert ev.decide_balanced_elementary(a_e, a_g) is None
    chain = ev.bsse_search(a_e, a_g, 2)
    assert chain is not None and len(chain) == 2 and chain.verify()

    # higher block graphs and the canonical map
    h2, cmap = ev.canonical_higher_block_map(gm, 2)
    assert h2.vertex_count() == 3 and h2.edge_count() == 5
    assert cmap.apply(["e", "f", "g"]) == ["e,f", "f,g"]

    # JSON round trips
    gm2 = ev.Graph.from_json(gm.to_json())
    assert gm2.vertex_ids() == gm.vertex_ids()
    t2 = ev.Triple.from_json(triple.to_json())
    assert ev.verify_balanced_elementary(ae, af, t2)

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
