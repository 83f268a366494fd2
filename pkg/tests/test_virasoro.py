import pytest

from orbigw.correlators import (CANONICAL_RESCALED, CLASS_BASIS,
                                OrbifoldTheory)
from orbigw.groups import named_group
from orbigw.series import (LevelCapExceeded, SeriesCaps, TruncatedSeries,
                           mono_from_vars)
from orbigw.util import Q
from orbigw.virasoro import (DIAGONAL, PER_INDEX, VariableSystemMismatch,
                             VirasoroSpec, apply_virasoro, commutator_check,
                             diagonal_combination_residual,
                             factorization_check, kdv_check,
                             mutation_sensitivity, virasoro_check)

CAPS = SeriesCaps(degree=6, level=8, genus=3)


@pytest.fixture(scope="module")
def z2():
    return OrbifoldTheory(named_group("Z", 2))


@pytest.fixture(scope="module")
def s3():
    return OrbifoldTheory(named_group("S", 3))


def test_first_term_coefficient():
    # leading term of L_1 is -(5!!/4) d/du_2
    s = TruncatedSeries.from_monomial(CAPS, mono_from_vars([(2, 0)]), Q(1),
                                      system=CANONICAL_RESCALED)
    out = apply_virasoro(VirasoroSpec(PER_INDEX, 1, 1, alpha=0), s)
    assert out.coefficient((), 0) == Q(-15, 4)


def test_constant_terms():
    one_u = TruncatedSeries.one(CAPS, system=CANONICAL_RESCALED)
    out = apply_virasoro(VirasoroSpec(PER_INDEX, 0, 1, alpha=0), one_u)
    assert out.coefficient((), 0) == Q(1, 16)

    s3 = OrbifoldTheory(named_group("S", 3))
    one_t = TruncatedSeries.one(CAPS, system=CLASS_BASIS)
    out = apply_virasoro(VirasoroSpec(DIAGONAL, 0, 3), one_t,
                         algebra=s3.algebra)
    assert out.coefficient((), 0) == Q(3, 16)


def test_string_operator_on_constant_is_not_zero():
    # L_{-1} applied to Z = 1 leaves the quadratic lambda^-2 term, so the
    # constant series is not annihilated
    one_u = TruncatedSeries.one(CAPS, system=CANONICAL_RESCALED)
    out = apply_virasoro(VirasoroSpec(PER_INDEX, -1, 1, alpha=0), one_u)
    assert out.coefficient(mono_from_vars([(0, 0), (0, 0)]), -2) == Q(1, 2)


def test_dilation_shift():
    # dilation part of L_1 maps u_3 to ((2*2+2+1)!!/(3!! * 4)) u_2
    s = TruncatedSeries.from_monomial(CAPS, mono_from_vars([(3, 0)]), Q(1),
                                      system=CANONICAL_RESCALED)
    out = apply_virasoro(VirasoroSpec(PER_INDEX, 1, 1, alpha=0), s)
    assert out.coefficient(mono_from_vars([(2, 0)]), 0) == \
        Q(105, 3 * 4)


def test_variable_system_mismatch():
    s = TruncatedSeries.one(CAPS, system=CLASS_BASIS)
    with pytest.raises(VariableSystemMismatch):
        apply_virasoro(VirasoroSpec(PER_INDEX, 0, 1, alpha=0), s)


def test_level_cap_guard():
    caps = SeriesCaps(degree=4, level=2, genus=1)
    s = TruncatedSeries.one(caps, system=CANONICAL_RESCALED)
    with pytest.raises(LevelCapExceeded):
        apply_virasoro(VirasoroSpec(PER_INDEX, 2, 1, alpha=0), s)


def test_spec_validation():
    with pytest.raises(ValueError):
        VirasoroSpec(PER_INDEX, -2, 1, alpha=0)
    with pytest.raises(ValueError):
        VirasoroSpec(PER_INDEX, 0, 2)
    with pytest.raises(ValueError):
        VirasoroSpec("sideways", 0, 2)


def test_bracket_antisymmetry_and_relation():
    rep = commutator_check(VirasoroSpec(PER_INDEX, 0, 2, alpha=0),
                           VirasoroSpec(PER_INDEX, 0, 2, alpha=0), seed=1)
    assert rep.passed
    rep = commutator_check(VirasoroSpec(PER_INDEX, 1, 2, alpha=0),
                           VirasoroSpec(PER_INDEX, -1, 2, alpha=0), seed=2)
    assert rep.passed
    rep = commutator_check(VirasoroSpec(PER_INDEX, 2, 2, alpha=0),
                           VirasoroSpec(PER_INDEX, 1, 2, alpha=0), seed=3)
    assert rep.passed


def test_bracket_distinct_indices_commute():
    rep = commutator_check(VirasoroSpec(PER_INDEX, 1, 3, alpha=1),
                           VirasoroSpec(PER_INDEX, -1, 3, alpha=2), seed=4)
    assert rep.passed


def test_bracket_diagonal(s3):
    for m, n in ((1, -1), (2, 0), (2, -1), (0, 0)):
        rep = commutator_check(VirasoroSpec(DIAGONAL, m, 3),
                               VirasoroSpec(DIAGONAL, n, 3),
                               algebra=s3.algebra, seed=5)
        assert rep.passed, (m, n)


def test_virasoro_annihilation_trivial_group():
    triv = OrbifoldTheory(named_group("Z", 1))
    reports = virasoro_check(triv, degree=6, genus=2, headroom=1)
    assert len(reports) == 8
    for rep in reports:
        assert rep.passed, rep.operator
        assert rep.max_residual == 0
        assert rep.checked_monomials > 0


def test_virasoro_annihilation_z2(z2):
    reports = virasoro_check(z2, degree=5, genus=1, headroom=1)
    assert all(rep.passed for rep in reports)


def test_virasoro_mutation_detected(z2):
    target = ((((1, 0), 1),), 0)
    reports = virasoro_check(z2, degree=5, genus=1, families=DIAGONAL,
                             mutate=target)
    assert any(not rep.passed for rep in reports)
    bad = next(rep for rep in reports if not rep.passed)
    assert bad.violations  # located violation with monomial and lambda
    assert "monomial" in bad.violations[0]


def test_kdv_trivial_and_z2(z2):
    triv = OrbifoldTheory(named_group("Z", 1))
    for theory in (triv, z2):
        reports = kdv_check(theory, a_max=2, degree=4, genus=1)
        assert reports and all(rep.passed for rep in reports)
        assert all(rep.checked_monomials > 0 for rep in reports)


def test_kdv_vanishing_slice(z2):
    # with v in the nontrivial class both sides vanish in the genus-0
    # degree-0 slice: the lhs coefficient of the empty monomial is zero
    reports = kdv_check(z2, a_max=1, degree=2, genus=0)
    assert all(rep.passed for rep in reports)


def test_factorization_z2(z2):
    rep = factorization_check(z2, degree=6, genus=2, tol=1e-9)
    assert rep.passed
    assert rep.max_residual < 1e-9


def test_factorization_s3(s3):
    rep = factorization_check(s3, degree=4, genus=1, tol=1e-8)
    assert rep.passed


def test_factorization_trivial_group_exact():
    triv = OrbifoldTheory(named_group("Z", 1))
    rep = factorization_check(triv, degree=5, genus=1, tol=1e-12)
    assert rep.passed


def test_factorization_strict_raises(z2):
    from orbigw.virasoro import ToleranceExceeded
    with pytest.raises(ToleranceExceeded) as exc:
        factorization_check(z2, degree=4, genus=1, tol=1e-30, strict=True)
    assert "monomial" in str(exc.value)


def test_factorization_complex_characters():
    # cyclic groups beyond Z_2 have idempotents in conjugate pairs; the
    # transport must come back real within tolerance
    for n in (3, 4, 5):
        th = OrbifoldTheory(named_group("Z", n))
        rep = factorization_check(th, degree=4, genus=1, tol=1e-8)
        assert rep.passed, n


def test_virasoro_complex_characters_and_q8():
    z3 = OrbifoldTheory(named_group("Z", 3))
    assert all(r.passed for r in virasoro_check(z3, degree=4, genus=1))
    assert all(r.passed for r in kdv_check(z3, a_max=1, degree=3, genus=1))
    q8 = OrbifoldTheory(named_group("Q8"))
    assert all(r.passed for r in virasoro_check(q8, degree=4, genus=1))


def test_diagonal_is_rescaled_sum(z2, s3):
    for theory in (z2, s3):
        for m in (-1, 0, 1, 2):
            assert diagonal_combination_residual(theory, m, seed=9) < 1e-8


def test_mutation_sensitivity_z2(z2):
    out = mutation_sensitivity(z2)
    assert out["passed"]
    assert out["mutated"] > 20


def test_reports_serialize(z2):
    reports = virasoro_check(z2, degree=4, genus=1)
    payload = [rep.to_json_dict() for rep in reports]
    for row in payload:
        assert set(row) >= {"operator", "checked_monomials", "max_residual",
                            "watermark", "violations"}
        assert row["max_residual"] == "0/1"
