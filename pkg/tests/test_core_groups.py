from fractions import Fraction

import numpy as np

import pytest

from core_groups import (
    _echelon_rows,
    AbelianLGroup,
    OracleTooLargeError,
    automorphism_generators,
    c_ell,
    compose_homs,
    count_aut,
    count_aut_bruteforce,
    count_hom,
    count_matrices_of_rank,
    count_surj_groups,
    count_surj_groups_bruteforce,
    count_symmetric_of_corank,
    gaussian_binomial,
    groups_up_to,
    identity_hom,
    is_automorphism,
    iterate_elements,
    iterate_homomorphisms,
    pochhammer,
    sym2_torsion_order,
    tail_product,
    tensor_torsion_orders_bruteforce,
    wedge2_torsion_order,
)
from linalg import rank_mod, smith_local
from settings import get_settings


SMALL = [(1,), (2,), (1, 1), (2, 1), (1, 1, 1), (2, 2)]


def test_parse_sorts_and_accepts_trivial():
    assert AbelianLGroup.parse(3, "1,2").exponents == (2, 1)
    assert AbelianLGroup.parse(3, "").is_trivial()
    assert AbelianLGroup.parse(5, " 3 , 1 ,1").order == 5**5


@pytest.mark.parametrize("ell,exps", [(2, (1,)), (9, (1,)), (3, (1, 2)), (3, (0,))])
def test_invalid_groups_are_rejected(ell, exps):
    with pytest.raises(ValueError):
        AbelianLGroup(ell, exps)


def test_parse_rejects_garbage():
    with pytest.raises(ValueError, match="malformados"):
        AbelianLGroup.parse(3, "1,a")


def test_pochhammer_and_gaussian_binomial():
    x = Fraction(1, 3)
    assert pochhammer(x, x, 0) == 1
    assert pochhammer(x, x, 2) == Fraction(2, 3) * Fraction(8, 9)
    assert gaussian_binomial(2, 1, x) == Fraction(4, 3)
    assert gaussian_binomial(2, 3, x) == 0


def test_matrix_counts_partition_the_whole_space():
    assert sum(count_matrices_of_rank(2, 3, rho, 3) for rho in range(3)) == 3**6
    assert count_matrices_of_rank(2, 2, 2, 3) == 48
    for m in (1, 2, 3):
        assert sum(count_symmetric_of_corank(m, j, 3) for j in range(m + 1)) == 3 ** (m * (m + 1) // 2)


@pytest.mark.parametrize("exps", SMALL)
def test_count_aut_matches_bruteforce(exps):
    group = AbelianLGroup(3, exps)
    assert count_aut(group) == count_aut_bruteforce(group)


def test_count_aut_known_values():
    assert count_aut(AbelianLGroup(3, (1, 1))) == 48
    assert count_aut(AbelianLGroup(3, (2,))) == 6
    assert count_aut(AbelianLGroup(3, (2, 1))) == 108
    assert count_aut(AbelianLGroup(3, (1, 1, 1))) == 26 * 24 * 18
    assert count_aut(AbelianLGroup(3, ())) == 1


@pytest.mark.parametrize("src", SMALL)
@pytest.mark.parametrize("dst", [(1,), (2,), (1, 1), (2, 1)])
def test_count_surj_matches_bruteforce(src, dst):
    source, target = AbelianLGroup(3, src), AbelianLGroup(3, dst)
    assert count_surj_groups(source, target) == count_surj_groups_bruteforce(source, target)


def test_count_surj_known_values():
    assert count_surj_groups(AbelianLGroup(3, (1, 1)), AbelianLGroup(3, (1,))) == 8
    assert count_surj_groups(AbelianLGroup(3, (1,)), AbelianLGroup(3, (1, 1))) == 0
    assert count_surj_groups(AbelianLGroup(3, (1,)), AbelianLGroup(3, ())) == 1


def test_homomorphism_enumeration_size():
    src, dst = AbelianLGroup(3, (2, 1)), AbelianLGroup(3, (2,))
    assert sum(1 for _ in iterate_homomorphisms(src, dst)) == count_hom(src, dst) == 3**3


@pytest.mark.parametrize("exps", SMALL)
def test_tensor_orders_match_bruteforce(exps):
    group = AbelianLGroup(3, exps)
    for n in (1, 2, 3):
        assert tensor_torsion_orders_bruteforce(group, n) == (
            wedge2_torsion_order(group, n),
            sym2_torsion_order(group, n),
        )


def test_tensor_orders_elementary():
    group = AbelianLGroup(3, (1, 1))
    assert wedge2_torsion_order(group, 1) == 3
    assert sym2_torsion_order(group, 1) == 27


def test_c_ell_agrees_with_tail_product():
    for ell in (3, 5, 7):
        assert c_ell(ell, 1e-12) == pytest.approx(tail_product(ell, 0, 1e-12), abs=1e-11)
    assert c_ell(3, 1e-12) == pytest.approx(0.639005, abs=1e-5)


def test_tail_product_increases_with_t():
    values = [tail_product(3, t, 1e-12) for t in range(4)]
    assert values == sorted(values)
    assert values[-1] < 1


def test_groups_up_to_order_27():
    groups = groups_up_to(3, 27)
    assert [g.exponents for g in groups] == [(), (1,), (2,), (1, 1), (3,), (2, 1), (1, 1, 1)]


@pytest.mark.parametrize("exps", SMALL)
def test_generators_are_automorphisms(exps):
    group = AbelianLGroup(3, exps)
    gens = automorphism_generators(group)
    assert gens
    assert all(is_automorphism(g, group) for g in gens)
    ident = identity_hom(group)
    assert all(compose_homs(ident, g, group) == g for g in gens)


def test_oracle_cap_is_enforced(monkeypatch):
    monkeypatch.setenv("BEG_ORACLE_CAP", "2")
    get_settings.cache_clear()
    try:
        with pytest.raises(OracleTooLargeError, match="oracle too large"):
            list(iterate_elements(AbelianLGroup(3, (1, 1, 1))))
    finally:
        get_settings.cache_clear()


def test_invalid_environment_value(monkeypatch):
    monkeypatch.setenv("BEG_TOL", "abc")
    get_settings.cache_clear()
    try:
        with pytest.raises(RuntimeError, match="BEG_TOL"):
            get_settings()
    finally:
        get_settings.cache_clear()


def _span_invariants(rows, width, ell, precision):
    if not rows:
        return [precision] * width
    _, _, vals = smith_local(np.array(rows, dtype=object), ell, precision)
    return sorted(vals + [precision] * (width - len(vals)))


def test_echelon_keeps_every_generator():
    rows = _echelon_rows([[2, 1], [1, 1]], 3, 1)
    assert len(rows) == 2
    assert rank_mod(rows, 3) == 2


@pytest.mark.parametrize("ell,precision", [(3, 2), (3, 3), (5, 2)])
def test_echelon_preserves_the_span(ell, precision):
    rng = np.random.default_rng(11)
    modulus = ell**precision
    for _ in range(20):
        rows = rng.integers(0, modulus, size=(7, 3)).tolist()
        # linhas múltiplas de ℓ forçam pivôs de valuação positiva
        rows = [[ell * x for x in row] for row in rows[:3]] + rows[3:5]
        out = _echelon_rows(rows, ell, precision)
        assert len(out) <= 3
        assert _span_invariants(out, 3, ell, precision) == _span_invariants(rows, 3, ell, precision)
