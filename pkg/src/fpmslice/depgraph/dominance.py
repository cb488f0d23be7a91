"""Post-dominator tree and control dependence via post-dominance frontiers."""

from __future__ import annotations

from .cfg import Cfg


def _reverse_postorder(start: int, succ: dict[int, list[int]]) -> list[int]:
    seen = {start}
    order: list[int] = []
    stack = [(start, iter(succ.get(start, ())))]
    while stack:
        node, it = stack[-1]
        for nxt in it:
            if nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, iter(succ.get(nxt, ()))))
                break
        else:
            stack.pop()
            order.append(node)
    order.reverse()
    return order


def immediate_dominators(start: int, succ: dict[int, list[int]]) -> dict[int, int]:
    """Cooper/Harvey/Kennedy iterative dominators; ``idom[start] == start``.

    Nodes unreachable from ``start`` are absent from the result.
    """
    rpo = _reverse_postorder(start, succ)
    pos = {n: i for i, n in enumerate(rpo)}
    preds: dict[int, list[int]] = {n: [] for n in rpo}
    for n in rpo:
        for m in succ.get(n, ()):
            if m in preds:
                preds[m].append(n)
    idom = {start: start}

    def intersect(a: int, b: int) -> int:
        while a != b:
            while pos[a] > pos[b]:
                a = idom[a]
            while pos[b] > pos[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in rpo[1:]:
            new = None
            for p in preds[n]:
                if p in idom:
                    new = p if new is None else intersect(p, new)
            if new is not None and idom.get(n) != new:
                idom[n] = new
                changed = True
    return idom


def post_dominators(cfg: Cfg) -> dict[int, int]:
    """Immediate post-dominator of every block (the exit maps to itself).

    Blocks that cannot reach the exit are given the exit as their
    post-dominator, which keeps the frontier walk below well defined.
    """
    reverse: dict[int, list[int]] = {b: [] for b in range(len(cfg.blocks))}
    for a, b in cfg.edges:
        reverse[b].append(a)
    ipdom = immediate_dominators(cfg.exit, reverse)
    for b in range(len(cfg.blocks)):
        ipdom.setdefault(b, cfg.exit)
    return ipdom


def block_control_dependence(cfg: Cfg) -> dict[int, set[int]]:
    """Map each block to the set of branch blocks it is control dependent on."""
    ipdom = post_dominators(cfg)
    deps: dict[int, set[int]] = {b: set() for b in range(len(cfg.blocks))}
    succ = cfg.block_succ()
    for a, targets in succ.items():
        if len(targets) < 2:
            continue
        stop = ipdom[a]
        for b in targets:
            runner = b
            while runner != stop:
                deps[runner].add(a)
                nxt = ipdom[runner]
                if nxt == runner:
                    break
                runner = nxt
    return deps


def control_dependence(cfg: Cfg) -> set[tuple[int, int]]:
    """C edges ``(predicate statement, dependent statement)``.

    A branch block always ends with its predicate statement, so edges leave
    only ``if``/``while``/``for``/``switch`` nodes.
    """
    edges: set[tuple[int, int]] = set()
    for block, branches in block_control_dependence(cfg).items():
        for a in branches:
            pred_stmt = cfg.blocks[a][-1]
            for s in cfg.blocks[block]:
                edges.add((pred_stmt, s))
    return edges
