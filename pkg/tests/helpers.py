"""Reference formulas and generators shared by the test modules.

The Hopf formulas here are written out independently of the library (pair
enumeration instead of suffix sums) so tests do not grade the code with
itself.
"""
from fractions import Fraction

from hopflink.links import (BalancedLink, Interlocked, LinkExpression, SignedTerm, Standard, Twisted, Unit,
                            add_balanced, balance, balanced_for_hopf, cancel, interlocked_to_balanced,
                            rebalance, twisted_to_balanced)


def ref_term_hopf(t):
    if isinstance(t, Standard):
        return 2 * t.a * t.b
    if isinstance(t, Unit):
        return t.eps
    if isinstance(t, Twisted):
        # a full turn is two half twists plus one framing turn per wire: 2H + d = d^2
        return (t.d * t.d - t.d) // 2
    if isinstance(t, Interlocked):
        n = t.n
        return 2 * sum(t.a[i - 1] * t.b[j - 1] for i in range(1, n + 1) for j in range(1, n + 1) if i + j > n)
    raise TypeError(t)


def ref_hopf(terms):
    if isinstance(terms, LinkExpression):
        terms = terms.terms
    if isinstance(terms, SignedTerm):
        terms = (terms,)
    return sum(st.sign * ref_term_hopf(st.term) for st in terms)


def ref_balanced(a, b, c, eps=0):
    return (a, b, c) == (0, 0, 0) or (2 * b >= a >= b and a >= c and c >= 0)


def random_balanced(rng, hmax=10 ** 6):
    return balanced_for_hopf(int(rng.integers(-1, hmax)))


def sample_traces(rng, count):
    """(initial, trace, final) triples from the main engine operations."""
    out = []
    kinds = ["balance", "cancel", "rebalance", "add", "twisted", "interlocked"]
    while len(out) < count:
        kind = kinds[len(out) % len(kinds)]
        if kind == "balance":
            a = int(rng.integers(2, 3000))
            b = int(rng.integers(1, a + 1))
            c = int(rng.integers(0, a + 1))
            x = LinkExpression.of(Standard(a, b), Standard(c, 1))
            y, t = balance(x)
            if len(t):
                out.append((x, t, y.expression()))
        elif kind == "cancel":
            x = random_balanced(rng)
            n = (x.hopf - x.eps) // 2
            b = max(1, int(n ** 0.5) - int(rng.integers(0, 3)))
            a, c = divmod(n, b) if n else (0, 0)
            y = BalancedLink(a, b, c, x.eps) if n and BalancedLink(a, b, c).is_balanced else x
            out.append((x.expression(1) + y.expression(-1), cancel(x, y), LinkExpression()))
        elif kind == "rebalance":
            x = random_balanced(rng, 10 ** 5)
            tg = balanced_for_hopf(x.hopf)
            if tg.a > 2 and rng.random() < 0.7:
                n = (x.hopf - x.eps) // 2
                b = tg.b - 1 - int(rng.integers(0, max(1, tg.b // 4)))
                a, c = divmod(n, b)
                if b >= 1 and BalancedLink(a, b, c).is_balanced:
                    tg = BalancedLink(a, b, c, x.eps)
            t = rebalance(x, tg)
            if len(t):
                out.append((x.expression(), t, tg.expression()))
        elif kind == "add":
            x, y = random_balanced(rng, 10 ** 5), random_balanced(rng, 10 ** 5)
            tg = balanced_for_hopf(x.hopf + y.hopf)
            out.append((x.expression() + y.expression(), add_balanced(x, y, tg), tg.expression()))
        elif kind == "twisted":
            d = int(rng.integers(2, 200))
            tg = balanced_for_hopf(d * (d - 1) // 2)
            out.append((LinkExpression.of(Twisted(d)), twisted_to_balanced(Twisted(d), tg), tg.expression()))
        else:
            n = int(rng.integers(1, 5))
            t = Interlocked(n, tuple(int(v) for v in rng.integers(0, 9, n)), tuple(int(v) for v in rng.integers(0, 9, n)))
            tg = balanced_for_hopf(ref_term_hopf(t))
            out.append((LinkExpression.of(t), interlocked_to_balanced(t, tg), tg.expression()))
    return out


def frac(x):
    return Fraction(x)
