import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cornfield.distribution import (
    AVERAGE_NULL,
    AssumptionLevel,
    Assumption,
    JointLaw,
    LawBatch,
    LawError,
    PreconditionError,
    batch_lemma1,
    batch_rd,
    batch_rr,
    batch_summarize,
    check_assumption,
    check_average_null,
    check_conditional_null,
    check_monotone,
    lemma1_decomposition,
    law_from_text,
    law_to_text,
    marginal_measures,
    permute_levels,
    relabel_reference,
    summarize,
)
from cornfield.measures import TwoByTwo, relative_risk, risk_difference
from cornfield.oracle.sampling import SamplerConfig, sample_null_batch, chunk_rng

unit = st.floats(min_value=0.0, max_value=1.0)
weight = st.floats(min_value=0.01, max_value=1.0)


@st.composite
def simplex(draw, k):
    w = np.array(draw(st.lists(weight, min_size=k, max_size=k)))
    return tuple((w / w.sum()).tolist())


@st.composite
def laws(draw, k=None, null=False):
    if k is None:
        k = draw(st.integers(min_value=2, max_value=5))
    p_e = draw(st.floats(min_value=0.05, max_value=0.95))
    f1 = draw(simplex(k))
    f0 = draw(simplex(k))
    r = tuple(draw(st.lists(unit, min_size=k, max_size=k)))
    r_star = r if null else tuple(draw(st.lists(unit, min_size=k, max_size=k)))
    return JointLaw(p_e, f1, f0, r_star, r)


# ---------------------------------------------------------------------------
# construction


def test_law_validation():
    with pytest.raises(LawError):
        JointLaw(0.5, (0.5, 0.6), (0.5, 0.5), (0.1, 0.1), (0.1, 0.1))
    with pytest.raises(LawError):
        JointLaw(1.0, (0.5, 0.5), (0.5, 0.5), (0.1, 0.1), (0.1, 0.1))
    with pytest.raises(LawError):
        JointLaw(0.5, (1.0,), (1.0,), (0.1,), (0.1,))
    with pytest.raises(LawError):
        JointLaw(0.5, (0.5, 0.5), (0.5, 0.5), (0.1, 1.2), (0.1, 0.1))


def test_degenerate_level_rejected():
    with pytest.raises(LawError, match="zero mass"):
        JointLaw(0.5, (0.5, 0.5, 0.0), (0.5, 0.5, 0.0), (0.1,) * 3, (0.1,) * 3)


# ---------------------------------------------------------------------------
# summaries


def test_summary_perfectly_predictive_confounder():
    law = JointLaw.conditional_null(0.3, (0, 1), (1, 0), (0.1, 0.2))
    s = summarize(law)
    assert s.alpha == (-1.0, 1.0)
    assert s.a_max == 1.0
    assert s.u_d == pytest.approx(2.0)
    assert s.u_d_prime == pytest.approx(2.0)
    assert s.u_e == math.inf


def test_summary_no_exposure_confounder_association():
    law = JointLaw.conditional_null(0.4, (0.3, 0.7), (0.3, 0.7), (0.1, 0.2))
    s = summarize(law)
    assert s.alpha == (0.0, 0.0)
    assert s.a_max == 0.0
    assert s.u_e == pytest.approx(1.0)


def test_summary_three_levels_by_hand():
    law = JointLaw.conditional_null(0.5, (0.2, 0.3, 0.5), (0.4, 0.4, 0.2), (0.1, 0.1, 0.1))
    s = summarize(law)
    assert s.a_max == pytest.approx(0.3, abs=1e-15)
    assert s.u_d == 1.0
    assert s.b_max == 0.0
    assert s.beta1[0] == s.beta0[0] == 0.0
    # Bayes by hand: p_k = 0.5 f1_k / (0.5 f1_k + 0.5 f0_k)
    assert s.p == pytest.approx((0.2 / 0.6, 0.3 / 0.7, 0.5 / 0.7))


# ---------------------------------------------------------------------------
# marginal measures


def test_marginal_measures_examples():
    m = marginal_measures(JointLaw.conditional_null(0.5, (0.3, 0.7), (0.3, 0.7), (0.2, 0.5)))
    assert m.rr_ed == pytest.approx(1.0)
    assert m.rd_ed == pytest.approx(0.0, abs=1e-15)
    m = marginal_measures(JointLaw.conditional_null(0.5, (0, 1), (1, 0), (0.1, 0.3)))
    assert m.rr_ed == pytest.approx(3.0)
    assert m.rd_ed == pytest.approx(0.2)


@given(laws(null=True))
def test_conditional_null_rd_is_sum_r_alpha(law):
    m = marginal_measures(law)
    assert m.rd_ed == pytest.approx(sum(r * a for r, a in zip(law.r, law.alpha)), abs=1e-12)


def test_marginal_matches_count_table():
    # a law with rational entries reproduces the counts of the table it was read from
    law = JointLaw.conditional_null(0.5, (0.25, 0.75), (0.75, 0.25), (0.2, 0.6))
    # exposed: 1000 people, 250 at U=0 (risk 0.2), 750 at U=1 (risk 0.6)
    t = TwoByTwo(50 + 450, 200 + 300, 150 + 150, 600 + 100)
    m = marginal_measures(law)
    assert m.rd_ed == pytest.approx(risk_difference(t), abs=1e-12)
    assert m.rr_ed == pytest.approx(relative_risk(t), abs=1e-12)


# ---------------------------------------------------------------------------
# assumption checks


def test_average_null_by_hand():
    # pr(U) = (0.5, 0.5): (r*_0 - 0.2) 0.5 + (0.5 - 0.4) 0.5 = 0 gives r*_0 = 0.1
    law = JointLaw(0.5, (0.3, 0.7), (0.7, 0.3), (0.1, 0.5), (0.2, 0.4))
    assert check_average_null(law)
    assert not check_conditional_null(law)


def test_null_checks():
    law = JointLaw.conditional_null(0.5, (0.3, 0.7), (0.7, 0.3), (0.2, 0.4))
    assert check_average_null(law) and check_conditional_null(law)
    shifted = JointLaw(0.5, law.f1, law.f0, tuple(x + 0.1 for x in law.r), law.r)
    assert not check_average_null(shifted)
    tol = 1e-9
    near = JointLaw(0.5, law.f1, law.f0, (0.2, 0.2 + tol / 2), (0.2, 0.2))
    assert check_conditional_null(near, tol)


@given(laws())
def test_conditional_null_implies_average_null(law):
    for tol in (1e-12, 1e-9, 1e-3):
        if check_conditional_null(law, tol):
            assert check_average_null(law, tol)


def test_monotone_examples():
    assert check_monotone((-0.3, 0.1, 0.2), reference=0)
    assert not check_monotone((0.1, -0.2, 0.1), reference=0)
    assert check_monotone((0.1, -0.2, 0.1), reference=1)
    with pytest.raises(IndexError):
        check_monotone((0.1, -0.1), reference=2)


@given(laws(k=2))
def test_binary_is_monotone_after_choosing_the_reference(law):
    neg = [j for j, a in enumerate(law.alpha) if a < 0]
    ref = neg[0] if neg else 0
    assert check_monotone(relabel_reference(law, ref).alpha, 0)


def test_check_assumption_includes_monotonicity():
    law = JointLaw.conditional_null(0.5, (0.4, 0.1, 0.5), (0.2, 0.3, 0.5), (0.1, 0.2, 0.3))
    assert check_assumption(law, AssumptionLevel(Assumption.CONDITIONAL_NULL, False))
    assert not check_assumption(law, AssumptionLevel(Assumption.CONDITIONAL_NULL, True))


# ---------------------------------------------------------------------------
# relabeling


def test_relabel_examples():
    law = JointLaw.conditional_null(0.5, (0.4, 0.1, 0.5), (0.2, 0.4, 0.4), (0.1, 0.2, 0.3))
    assert relabel_reference(law, 0) == law
    assert law.alpha == pytest.approx((0.2, -0.3, 0.1))
    moved = relabel_reference(law, 1)
    assert check_monotone(summarize(moved), reference=0)
    with pytest.raises(IndexError):
        relabel_reference(law, 3)


@given(laws(), st.randoms())
def test_relabeling_invariance(law, rnd):
    order = list(range(law.k))
    rnd.shuffle(order)
    moved = permute_levels(law, order)
    a, b = marginal_measures(law), marginal_measures(moved)
    assert b.rd_ed == pytest.approx(a.rd_ed, abs=1e-12)
    if a.rr_ed is not None and math.isfinite(a.rr_ed):
        assert b.rr_ed == pytest.approx(a.rr_ed, rel=1e-9, abs=1e-12)
    s, t = summarize(law), summarize(moved)
    for name in ("u_e", "u_d", "u_d_star", "u_d_prime"):
        x, y = getattr(s, name), getattr(t, name)
        assert y == x or y == pytest.approx(x, rel=1e-9)
    assert sorted(abs(x) for x in t.alpha) == pytest.approx(sorted(abs(x) for x in s.alpha), abs=1e-15)


# ---------------------------------------------------------------------------
# binary reduction and summary invariants


@given(laws(k=2))
def test_binary_reduction(law):
    s = summarize(law)
    p_u1 = law.pr_u[1]
    p1 = law.p_e * law.f1[1] / p_u1
    p0 = law.p_e * law.f1[0] / law.pr_u[0]
    if 0 < p0 < 1 and 0 < p1 < 1:
        odds_ratio = (p1 * (1 - p0)) / ((1 - p1) * p0)
        assert s.u_e == pytest.approx(max(odds_ratio, 1 / odds_ratio), rel=1e-9)
    if min(law.r) > 0:
        rr0 = law.r[1] / law.r[0]
        assert s.u_d == pytest.approx(max(rr0, 1 / rr0), rel=1e-12)
    if min(law.r_star) > 0:
        rr1 = law.r_star[1] / law.r_star[0]
        assert s.u_d_star == pytest.approx(max(rr1, 1 / rr1), rel=1e-12)
    assert s.a_max == pytest.approx(abs(law.f1[1] - law.f0[1]), abs=1e-15)


@given(laws())
def test_summary_invariants(law):
    s = summarize(law)
    assert abs(math.fsum(s.alpha)) <= 1e-12
    assert s.beta1[0] == 0.0 and s.beta0[0] == 0.0
    for name in ("u_e", "u_d", "u_d_star", "u_d_prime"):
        v = getattr(s, name)
        assert math.isnan(v) or v >= 1.0
    assert s.u_d_prime == max(s.u_d, s.u_d_star)


@given(st.lists(laws(k=3), min_size=1, max_size=20))
def test_batch_summary_matches_scalar(law_list):
    b = LawBatch.from_laws(law_list)
    bs = batch_summarize(b)
    for i, law in enumerate(law_list):
        s = summarize(law)
        assert bs.a_max[i] == pytest.approx(s.a_max, abs=1e-15)
        assert bs.b_max[i] == pytest.approx(s.b_max, abs=1e-15)
        for name in ("u_e", "u_d", "u_d_star", "u_d_prime"):
            x, y = getattr(s, name), getattr(bs, name)[i]
            assert (math.isnan(x) and np.isnan(y)) or y == x or y == pytest.approx(x, rel=1e-9)
        m = marginal_measures(law)
        assert batch_rd(b)[i] == pytest.approx(m.rd_ed, abs=1e-15)
        if m.rr_ed is not None and math.isfinite(m.rr_ed):
            assert batch_rr(b)[i] == pytest.approx(m.rr_ed, rel=1e-12)


# ---------------------------------------------------------------------------
# Lemma 1


def test_lemma1_examples():
    law = JointLaw.conditional_null(0.4, (0.3, 0.7), (0.3, 0.7), (0.2, 0.2))
    assert lemma1_decomposition(law) == 0.0
    law = JointLaw.conditional_null(0.4, (0.3, 0.7), (0.6, 0.4), (0.2, 0.5))
    rd_eu = 0.7 - 0.4
    rd_ud = 0.5 - 0.2
    assert lemma1_decomposition(law) == pytest.approx(rd_eu * rd_ud, abs=1e-15)
    assert lemma1_decomposition(law) == pytest.approx(marginal_measures(law).rd_ed, abs=1e-15)


def test_lemma1_precondition():
    law = JointLaw(0.5, (0.3, 0.7), (0.7, 0.3), (0.5, 0.5), (0.2, 0.4))
    with pytest.raises(PreconditionError):
        lemma1_decomposition(law)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_lemma1_on_sampled_average_null_laws(k):
    cfg = SamplerConfig(seed=11, n_samples=2000, k=k, assumption=AVERAGE_NULL)
    b = sample_null_batch(cfg, chunk_rng(cfg.seed, 0), 2000)
    assert np.abs(batch_lemma1(b) - batch_rd(b)).max() <= 1e-12
    for i in range(0, 2000, 97):
        law = b.law(i)
        assert abs(lemma1_decomposition(law, tol=1e-12) - marginal_measures(law).rd_ed) <= 1e-12


# ---------------------------------------------------------------------------
# text round trip


@given(laws())
def test_text_round_trip(law):
    assert law_from_text(law_to_text(law)) == law


def test_text_format_errors():
    good = law_to_text(JointLaw.conditional_null(0.5, (0.5, 0.5), (0.5, 0.5), (0.1, 0.2)))
    assert law_from_text("# comment\n" + good) is not None
    with pytest.raises(LawError):
        law_from_text(good.replace("r=", "q="))
    with pytest.raises(LawError):
        law_from_text(good.replace("k=2", "k=3"))
    with pytest.raises(LawError):
        law_from_text("p_e=0.5\n")
