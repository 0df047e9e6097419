import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rspir.adversary import AdversarySpec, corrupt_round, fixed
from rspir.galois import GF, ZERO_DEGREE, Polynomial, poly_interpolate
from rspir.protocol import (
    InfeasibleParameters,
    RetrievalSession,
    RoundFailure,
    SchemeParams,
    build_query_round,
    compute_params,
    decode_round,
    monomial_term,
    query_exponent,
    reconstruct_file,
    response_code,
    server_response,
    symmetric_mask,
)
from rspir.reed_solomon import ERASURE
from rspir.simulation import build_system


def minimal_stripes_rounds(rho, k):
    """Smallest L (and matching S) with L*k == S*rho, by search."""
    L = 1
    while (L * k) % rho:
        L += 1
    return L, L * k // rho


@pytest.mark.parametrize("args,rho,L,S,rate", [
    ((9, 4, 1, 1, 1), 2, 1, 2, Fraction(1, 4)),
    ((14, 4, 2, 1, 1), 6, 3, 2, Fraction(6, 13)),
    ((3, 1, 1, 0, 0), 2, 2, 1, Fraction(2, 3)),
])
def test_compute_params_examples(args, rho, L, S, rate):
    prm = compute_params(*args)
    assert (prm.rho, prm.L, prm.S, prm.rate) == (rho, L, S, rate)
    assert minimal_stripes_rounds(prm.rho, prm.k) == (L, S)


def test_compute_params_grid_against_search():
    for n in range(1, 21):
        for k in range(1, n + 1):
            for t in range(4):
                for b in range(3):
                    for r in range(3):
                        if n <= k + t + 2 * b + r - 1:
                            with pytest.raises(InfeasibleParameters):
                                compute_params(n, k, t, b, r)
                            continue
                        prm = compute_params(n, k, t, b, r)
                        assert (prm.L, prm.S) == minimal_stripes_rounds(prm.rho, k)
                        assert prm.rate == Fraction(prm.rho, n - r)
                        assert prm.rho + prm.offset == prm.response_dimension


def test_infeasible_message_names_inequality():
    with pytest.raises(InfeasibleParameters, match="n > k \\+ t \\+ 2b \\+ r - 1"):
        compute_params(8, 4, 2, 1, 1)
    with pytest.raises(ValueError):
        compute_params(5, 0, 1, 0, 0)


def test_monomial_term():
    F = GF(17)
    assert monomial_term(7, 2, F) == F.monomial(7)
    assert monomial_term(-1, 2, F).is_zero()
    assert monomial_term(2, 2, F) == F.monomial(2)
    assert monomial_term(1, 2, F).degree == ZERO_DEGREE


def test_two_forms_of_query_exponent_agree():
    prm = compute_params(14, 4, 2, 1, 1)
    for s in (1, 2):
        for l in (1, 2, 3):
            assert query_exponent(prm, s, l) == s * prm.rho - l * prm.k + prm.k + prm.t - 1


def _added_term(q, m, l):
    return q.polynomial(m, l) - q.masks[(m, l)]


def test_small_preset_queries():
    prm = SchemeParams(9, 4, 1, 1, 1, M=3)
    system = build_system(prm, 65537, seed=1)
    F = system.code.field
    rng = random.Random(0)
    q1 = build_query_round(prm, system.code, 2, 1, rng)
    q2 = build_query_round(prm, system.code, 2, 2, rng)
    assert _added_term(q1, 2, 1) == F.monomial(2)
    assert _added_term(q2, 2, 1) == F.monomial(4)
    for m in (1, 3):
        assert _added_term(q1, m, 1).is_zero()
        assert q1.masks[(m, 1)].degree < prm.t
    # server vectors are the evaluations
    for j, a in enumerate(system.code.alphas):
        assert q1.vectors[j] == tuple(q1.polynomial(m, 1)(a) for m in (1, 2, 3))


def test_medium_preset_query_rows():
    prm = SchemeParams(14, 4, 2, 1, 1, M=2)
    F = GF(65537)
    code = build_system(prm, 65537).code
    q = build_query_round(prm, code, 1, 1, random.Random(4))
    assert [_added_term(q, 1, l) for l in (1, 2, 3)] == [F.monomial(7), F.monomial(3), F.zero_poly()]
    for l in (1, 2, 3):
        assert q.masks[(2, l)].degree < 2 and _added_term(q, 2, l).is_zero()


def test_build_query_round_range_checks():
    prm = SchemeParams(9, 4, 1, 1, 1, M=2)
    code = build_system(prm).code
    with pytest.raises(ValueError):
        build_query_round(prm, code, 1, 3, random.Random(0))
    with pytest.raises(ValueError):
        build_query_round(prm, code, 3, 1, random.Random(0))
    with pytest.raises(ValueError):
        build_query_round(prm, code, 0, 1, random.Random(0))


def test_server_response_examples():
    F7 = GF(7)
    assert server_response((0, 0), (3, 4), F7) == 0
    assert server_response((5,), (6,), F7) == 30 % 7
    assert server_response((1, 2), (3, 4), F7) == 4
    assert server_response((1, 2), (3, 4), F7, mask=3) == 0
    with pytest.raises(ValueError):
        server_response((1,), (3, 4), F7)


def symbolic_response(prm, system, q):
    """r^(s)(z) = sum_m sum_l q_l^m(z) f_l^m(z), by polynomial multiplication."""
    F = system.code.field
    acc = F.zero_poly()
    for m, f in enumerate(system.files, 1):
        for l in range(1, prm.L + 1):
            acc = acc + q.polynomial(m, l) * f.stripe(l)
    return acc


@pytest.mark.parametrize("prm", [
    SchemeParams(9, 4, 1, 1, 1, M=2),
    SchemeParams(14, 4, 2, 1, 1, M=2),
    SchemeParams(10, 3, 2, 1, 0, M=3),
    SchemeParams(11, 5, 1, 0, 2, M=2),
])
def test_response_polynomial_structure(prm):
    """High coefficients of the response polynomial are exactly the packages."""
    system = build_system(prm, 65537, seed=7)
    i = prm.M
    session = RetrievalSession(prm, system.code, i, random.Random(2))
    f = system.files[i - 1]
    # stream position (L-l)*k + c holds f_{l,c}
    stream = [0] * (prm.L * prm.k)
    for l in range(1, prm.L + 1):
        stream[(prm.L - l) * prm.k:(prm.L - l) * prm.k + prm.k] = f.rows[l - 1]
    while not session.done:
        q = session.next_query()
        s = q.s
        resp = symbolic_response(prm, system, q)
        assert resp.degree < prm.offset + s * prm.rho
        # evaluation route agrees with the symbolic one
        clean = [server_response(q.vectors[j], system.columns[j], system.code.field) for j in range(prm.n)]
        assert clean == [resp(a) for a in system.code.alphas]
        h = session.receive(clean)
        expected_h = stream[(prm.S - s) * prm.rho:(prm.S - s + 1) * prm.rho]
        assert h.padded(prm.rho) == expected_h
        # coefficients at offset + rho*(s-sigma) hold package sigma
        for sigma, hs in enumerate(session.packages, 1):
            base = prm.offset + prm.rho * (s - sigma)
            assert [resp.coeff(base + c) for c in range(prm.rho)] == hs.padded(prm.rho)
    assert session.result() == f


def test_degree_discipline_non_desired_rows():
    prm = SchemeParams(14, 4, 2, 1, 1, M=3)
    system = build_system(prm, 65537, seed=3)
    rng = random.Random(8)
    for s in (1, 2):
        q = build_query_round(prm, system.code, 2, s, rng)
        for m in (1, 3):
            for l in range(1, prm.L + 1):
                qp = q.polynomial(m, l)
                assert qp.degree < prm.t
                assert (qp * system.files[m - 1].stripe(l)).degree <= prm.k + prm.t - 2


def _round_words(prm, system, i, adversary, seed=0, symmetric=False):
    session = RetrievalSession(prm, system.code, i, random.Random(seed))
    words = []
    while not session.done:
        q = session.next_query()
        mask = (symmetric_mask(prm, system.code, q.s, random.Random(f"m{q.s}"))
                if symmetric else [0] * prm.n)
        clean = [server_response(q.vectors[j], system.columns[j], system.code.field, mask[j])
                 for j in range(prm.n)]
        word = corrupt_round(clean, adversary, q.s, system.code.field) if adversary else clean
        words.append(word)
        session.receive(word)
    return session


def test_decode_round_small_preset():
    prm = SchemeParams(9, 4, 1, 1, 1, M=2)
    system = build_system(prm, 65537, seed=11)
    adv = fixed(1, 1, [3], [7])
    session = _round_words(prm, system, 1, adv)
    f = system.files[0].rows[0]
    assert session.packages[0].padded(2) == [f[2], f[3]]
    assert session.packages[1].padded(2) == [f[0], f[1]]


def test_decode_round_medium_preset_first_package():
    prm = SchemeParams(14, 4, 2, 1, 1, M=2)
    system = build_system(prm, 65537, seed=12)
    session = _round_words(prm, system, 2, AdversarySpec(b=1, r=1, seed=5))
    f = system.files[1].rows
    F = system.code.field
    expected = F.poly([f[1][2], f[1][3]]) + F.poly(f[0]).shift(2)
    assert session.packages[0] == expected
    assert session.packages[1].padded(6) == list(f[2]) + [f[1][0], f[1][1]]


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 12), k=st.integers(1, 4), t=st.integers(0, 3), seed=st.integers(0, 10**6))
def test_decode_round_without_adversary_matches_interpolation(n, k, t, seed):
    if n <= k + t - 1:
        return
    prm = SchemeParams(n, k, t, 0, 0, M=2)
    system = build_system(prm, 65537, seed=seed)
    F = system.code.field
    rng = random.Random(seed)
    known = []
    for s in range(1, prm.S + 1):
        q = build_query_round(prm, system.code, 1, s, rng)
        clean = [server_response(q.vectors[j], system.columns[j], F) for j in range(n)]
        residual = [
            (v - sum(h(a) * pow(a, prm.offset + prm.rho * (s - sg), F.p) for sg, h in enumerate(known, 1))) % F.p
            for a, v in zip(system.code.alphas, clean)
        ]
        oracle = poly_interpolate(list(zip(system.code.alphas, residual)), F).slice(prm.offset, prm.offset + prm.rho)
        h = decode_round(clean, prm, response_code(prm, system.code), known, s)
        assert h == oracle
        known.append(h)


def test_decode_round_over_budget_raises():
    prm = SchemeParams(9, 4, 1, 1, 1, M=2)
    system = build_system(prm, 65537, seed=1)
    q = build_query_round(prm, system.code, 1, 1, random.Random(0))
    word = [server_response(q.vectors[j], system.columns[j], system.code.field) for j in range(9)]
    word[0] = word[1] = ERASURE
    with pytest.raises(RoundFailure):
        decode_round(word, prm, response_code(prm, system.code), [], 1)
    with pytest.raises(ValueError):
        decode_round(word, prm, response_code(prm, system.code), [], 2)


def test_reconstruct_examples():
    F = GF(101)
    ex1 = SchemeParams(9, 4, 1, 1, 1)
    h1, h2 = F.poly([12, 13]), F.poly([10, 11])
    assert reconstruct_file([h1, h2], ex1, F).rows == ((10, 11, 12, 13),)
    ex3 = SchemeParams(14, 4, 2, 1, 1)
    # rows f1 = 1..4, f2 = 5..8, f3 = 9..12
    p1 = F.poly([7, 8, 1, 2, 3, 4])
    p2 = F.poly([9, 10, 11, 12, 5, 6])
    assert reconstruct_file([p1, p2], ex3, F).rows == ((1, 2, 3, 4), (5, 6, 7, 8), (9, 10, 11, 12))
    single = SchemeParams(6, 3, 1, 0, 0)  # rho = 3 = k
    assert (single.L, single.S) == (1, 1)
    assert reconstruct_file([F.poly([1, 2, 3])], single, F).rows == ((1, 2, 3),)
    with pytest.raises(ValueError):
        reconstruct_file([h1], ex1, F)
    with pytest.raises(ValueError):
        reconstruct_file([h1, None], ex1, F)
    with pytest.raises(ValueError):
        reconstruct_file([h1, F.poly([1, 2, 3])], ex1, F)


def test_symmetric_mask_degree_and_transparency():
    prm = SchemeParams(9, 4, 1, 1, 1, M=2)
    system = build_system(prm, 65537, seed=2)
    F = system.code.field
    for s in (1, 2):
        mask = symmetric_mask(prm, system.code, s, random.Random(s))
        pi = poly_interpolate(list(zip(system.code.alphas, mask)), F)
        assert pi.degree < prm.k + prm.t - 1 == 4
    adv = AdversarySpec(b=1, r=1, seed=9)
    plain = _round_words(prm, system, 1, adv, seed=4)
    masked = _round_words(prm, system, 1, adv, seed=4, symmetric=True)
    assert plain.packages == masked.packages
    assert masked.result() == system.files[0]
    with pytest.raises(ValueError):
        symmetric_mask(prm, system.code, 3, random.Random(0))


def test_zero_mask_is_plain_scheme():
    prm = SchemeParams(9, 4, 1, 1, 1, M=2)
    system = build_system(prm, 65537, seed=2)
    q = build_query_round(prm, system.code, 1, 1, random.Random(0))
    F = system.code.field
    zero_pi = Polynomial(F, [])
    a = [server_response(q.vectors[j], system.columns[j], F) for j in range(9)]
    b = [server_response(q.vectors[j], system.columns[j], F, mask=zero_pi(alpha))
         for j, alpha in enumerate(system.code.alphas)]
    assert a == b


def test_packages_do_not_depend_on_query_randomness():
    prm = SchemeParams(14, 4, 2, 1, 1, M=3)
    system = build_system(prm, 65537, seed=21)
    runs = [_round_words(prm, system, 3, AdversarySpec(b=1, r=1, seed=sd), seed=sd) for sd in range(4)]
    assert all(r.packages == runs[0].packages for r in runs)


def test_session_ordering_errors():
    prm = SchemeParams(9, 4, 1, 1, 1, M=2)
    system = build_system(prm)
    session = RetrievalSession(prm, system.code, 1, random.Random(0))
    with pytest.raises(RuntimeError):
        session.receive([0] * 9)
    session.next_query()
    with pytest.raises(RuntimeError):
        session.next_query()
    with pytest.raises(ValueError):
        RetrievalSession(prm, system.code, 3, random.Random(0))
