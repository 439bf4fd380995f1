"""A textbook single-tape Turing machine over {0, 1, _}, independent of the package."""

BLANK = "_"

# (state, symbol) -> (new state, written symbol, move)
ALL_ONES = {
    ("scan", "1"): ("scan", "1", +1),
    ("scan", "0"): ("reject", "0", 0),
    ("scan", BLANK): ("accept", BLANK, 0),
}


def run_tm(table, word, start="scan", max_steps=1000):
    """Run ``table`` on ``word``; returns ``(verdict, trace)`` with one (state, head, tape) per step."""
    tape = dict(enumerate(word))
    state, head, trace = start, 0, []
    for _ in range(max_steps):
        trace.append((state, head, "".join(tape.get(i, BLANK) for i in range(len(word) + 1))))
        if state in ("accept", "reject"):
            return state == "accept", trace
        state, tape[head], move = table[(state, tape.get(head, BLANK))]
        head += move
    raise RuntimeError("classical machine did not halt")
