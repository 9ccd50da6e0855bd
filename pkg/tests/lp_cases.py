"""Hand-built LPs with known optima: (name, build, expected status, expected objective)."""

from isacopt.milp.model import EQ, GE, LE, MilpModel


def _model(bounds, rows, obj):
    m = MilpModel()
    for i, (lo, hi) in enumerate(bounds):
        m.add_var(f"x{i}", lo, hi)
    for coeffs, sense, rhs in rows:
        m.add_constr(dict(enumerate(coeffs)), sense, rhs)
    m.set_objective(dict(enumerate(obj)))
    return m


CASES = [
    ("single upper row", lambda: _model([(0, 10)], [([1], LE, 3)], [1]), "optimal", 3.0),
    ("textbook x+y<=1", lambda: _model([(0, 1), (0, 1)], [([1, 1], LE, 1)], [1, 1]), "optimal", 1.0),
    ("contradictory bounds", lambda: _model([(0, 10)], [([1], GE, 2), ([1], LE, 1)], [1]),
     "infeasible", None),
    ("bound only, no rows", lambda: _model([(-2, 5), (1, 4)], [], [1, -1]), "optimal", 4.0),
    ("minimize via negative objective", lambda: _model([(0, 10), (0, 10)], [([1, 1], GE, 4)], [-1, -2]),
     "optimal", -4.0),
    ("classic 2d vertex", lambda: _model([(0, 100), (0, 100)],
                                         [([1, 2], LE, 14), ([3, -1], GE, 0), ([1, -1], LE, 2)],
                                         [3, 4]), "optimal", 34.0),
    ("equality row", lambda: _model([(0, 10), (0, 10)], [([1, 1], EQ, 5)], [2, 1]), "optimal", 10.0),
    ("equality infeasible with bounds", lambda: _model([(0, 1), (0, 1)], [([1, 1], EQ, 3)], [1, 1]),
     "infeasible", None),
    ("negative lower bounds", lambda: _model([(-5, -1), (-3, 2)], [([1, 1], LE, 0)], [1, 1]),
     "optimal", 0.0),
    ("degenerate vertex (three rows through one point)",
     lambda: _model([(0, 10), (0, 10)], [([1, 1], LE, 2), ([1, 0], LE, 1), ([0, 1], LE, 1),
                                          ([1, -1], LE, 0)], [1, 1]), "optimal", 2.0),
    ("degenerate zero rhs", lambda: _model([(0, 5), (0, 5), (0, 5)],
                                           [([1, -1, 0], LE, 0), ([0, 1, -1], LE, 0), ([1, 1, 1], LE, 3)],
                                           [0, 0, 1]), "optimal", 3.0),
    ("bound flip only", lambda: _model([(0, 2), (0, 3)], [([1, 1], LE, 10)], [1, 1]), "optimal", 5.0),
    ("ge row forces artificial", lambda: _model([(0, 10), (0, 10)], [([1, 1], GE, 3), ([1, 0], LE, 1)],
                                                [-1, -1]), "optimal", -3.0),
    ("free-ish wide bounds", lambda: _model([(-1e3, 1e3)], [([2], LE, 7)], [1]), "optimal", 3.5),
    ("fractional knapsack relaxation", lambda: _model([(0, 1)] * 3, [([2, 3, 4], LE, 5)], [3, 4, 5]),
     "optimal", 7.0),
    ("redundant duplicate rows", lambda: _model([(0, 4), (0, 4)], [([1, 1], LE, 3), ([2, 2], LE, 6)],
                                                [1, 2]), "optimal", 6.0),
    ("zero objective", lambda: _model([(0, 1), (0, 1)], [([1, 1], LE, 1)], [0, 0]), "optimal", 0.0),
    ("infeasible ge chain", lambda: _model([(0, 1), (0, 1)], [([1, 1], GE, 3)], [1, 0]),
     "infeasible", None),
    ("mixed senses transportation", lambda: _model([(0, 10)] * 4,
                                                   [([1, 1, 0, 0], LE, 5), ([0, 0, 1, 1], LE, 5),
                                                    ([1, 0, 1, 0], EQ, 4), ([0, 1, 0, 1], EQ, 6)],
                                                   [-1, -2, -3, -1]), "optimal", -11.0),
    ("fixed variable", lambda: _model([(2, 2), (0, 10)], [([1, 1], LE, 5)], [1, 1]), "optimal", 5.0),
    ("all-negative coefficient row", lambda: _model([(0, 10), (0, 10)], [([-1, -1], GE, -6)], [1, 3]),
     "optimal", 18.0),
    ("klee-minty n=3", lambda: _model([(0, 1e4)] * 3,
                                      [([1, 0, 0], LE, 5), ([4, 1, 0], LE, 25), ([8, 4, 1], LE, 125)],
                                      [4, 2, 1]), "optimal", 125.0),
]
