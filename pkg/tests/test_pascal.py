from fractions import Fraction

import pytest

from pascalis.config import reset_config
from pascalis.corpus import builtin, fibonacci_affine, gh_composition, random_triangular
from pascalis.errors import DegenerateMap, NotHomogeneous, NotNormalForm, ResourceLimit
from pascalis.poly import Ambient
from pascalis.polymap import PolyMap, compose, extend, iterate, normalize
from pascalis.pascal import (
    PascalOutcome,
    binomial_relation_check,
    criterion_bound,
    default_m_max,
    delta,
    formal_inverse_truncated,
    homogeneous_layers_check,
    initial_truncation,
    invert,
    pascal_check,
    pascal_index_of,
    pascal_tableau,
    reconstruction_check,
    refutation_probe,
)

from .helpers import vars_of


def test_tableau_starts_at_identity_and_applies_delta(nagata):
    tab = pascal_tableau(nagata, 2)
    assert tab.steps[0].is_identity()
    assert tab.steps[1] == nagata.sub(PolyMap.identity(nagata.ambient))
    assert tab.steps[2] == delta(nagata, tab.steps[1])


def test_nagata_is_pascal_finite_with_index_3(nagata):
    status = pascal_check(nagata)
    assert status.outcome is PascalOutcome.FINITE
    assert status.index == 3
    assert status.component_indices == (3, 2, 1)
    assert pascal_index_of(status) == 3


def test_simple_triangular_index_2():
    f = builtin("simple_triangular").map
    status = pascal_check(f)
    assert status.is_finite
    assert status.index == 2


def test_identity_has_index_1():
    status = pascal_check(PolyMap.identity(Ambient(3)))
    assert status.index == 1
    assert status.component_indices == (1, 1, 1)


def test_tableau_pads_zero_steps_after_vanishing(nagata):
    tab = pascal_tableau(nagata, 10)
    assert tab.reached_zero
    assert tab.last_index == 3
    assert tab.step(7).is_zero()


def test_tableau_step_beyond_m_max_is_an_error():
    tab = pascal_tableau(fibonacci_affine(), 3)
    with pytest.raises(IndexError):
        tab.step(5)


def test_tableau_rejects_zero_m_max(nagata):
    with pytest.raises(ValueError):
        pascal_tableau(nagata, 0)


@pytest.mark.parametrize("a, b", [(0, 0), (1, 2)])
def test_fibonacci_recurrence_in_first_component(a, b):
    f = fibonacci_affine(a, b)
    tab = pascal_tableau(f, 20)
    for k in range(3, 21):
        assert tab.steps[k][0] == tab.steps[k - 1][0] + tab.steps[k - 2][0]
    assert pascal_check(f, 20).outcome is PascalOutcome.NOT_WITHIN_BOUND


def test_gh_composition_is_not_pascal_finite_but_factors_are():
    amb = Ambient(2)
    x1, x2 = vars_of(amb)
    g = PolyMap([x1 + x2 ** 3, x2])
    h = PolyMap([x1, x2 + x1 ** 2])
    assert pascal_check(g).index == 2
    assert pascal_check(h).index == 2
    status = pascal_check(gh_composition(), 10, term_ceiling=5000)
    assert status.outcome is PascalOutcome.NOT_WITHIN_BOUND


def test_term_ceiling_triggers_probe_with_evidence():
    status = pascal_check(gh_composition(), 10, term_ceiling=5000)
    assert status.probe is not None
    assert status.probe.certified
    assert status.probe.truncation >= 15
    assert status.exact_steps >= 2
    assert status.evidence[0].k == 0


def test_resource_limit_when_probe_cannot_certify(nagata):
    # nagata is finite, so no truncated tableau can certify non-finiteness
    with pytest.raises(ResourceLimit) as info:
        pascal_check(nagata, term_ceiling=3)
    assert info.value.ceiling == 3


def test_cheap_truncated_attempt_runs_before_the_exact_tableau():
    f = gh_composition()
    status = pascal_check(f, 10, term_ceiling=5000)
    assert status.probe.attempts[0] == initial_truncation(f, 10)
    trajectory = status.probe.evidence
    assert [s.k for s in trajectory] == list(range(11))
    assert not trajectory[-1].is_zero


def test_resource_limit_keeps_only_completed_steps():
    with pytest.raises(ResourceLimit) as info:
        pascal_tableau(gh_composition(), 10, term_ceiling=50)
    partial = info.value.partial
    assert len(partial.steps) == info.value.step
    assert all(max(s.term_counts) <= 50 for s in partial.stats)


def test_work_budget_never_lets_a_step_run_longer(tmp_path):
    with pytest.raises(ResourceLimit) as loose:
        pascal_tableau(gh_composition(), 10, term_ceiling=200)
    config = tmp_path / "work.yaml"
    config.write_text("pascal:\n  work_factor: 1\n", encoding="utf-8")
    reset_config(str(config))
    with pytest.raises(ResourceLimit) as tight:
        pascal_tableau(gh_composition(), 10, term_ceiling=200)
    assert tight.value.ceiling == 200
    assert 1 <= tight.value.step <= loose.value.step


def test_exact_only_check_skips_truncated_attempt():
    f = fibonacci_affine(0, 0)
    status = pascal_check(f, 6, use_probe=False)
    assert status.outcome is PascalOutcome.NOT_WITHIN_BOUND
    assert status.probe is None
    assert status.exact_steps == 6


def test_refutation_probe_refuses_identity_and_translations():
    amb = Ambient(2)
    x1, x2 = vars_of(amb)
    assert not refutation_probe(PolyMap.identity(amb), 5).certified
    assert not refutation_probe(PolyMap([x1 + 1, x2]), 5).certified


def test_criterion_bound_values(nagata, vasyunin):
    # floor((D^(n-1) - d_i)/(d - 1) + 1) + 1
    nf = normalize(nagata)
    assert criterion_bound(nf, 0) == 13
    assert criterion_bound(nf, 1) == 13
    with pytest.raises(DegenerateMap):
        criterion_bound(nf, 2)
    vf = normalize(vasyunin)
    assert criterion_bound(vf, 2) == 16


def test_default_m_max_is_capped(nagata, tmp_path):
    assert default_m_max(nagata) == 39
    config = tmp_path / "limits.yaml"
    config.write_text("pascal:\n  m_max_cap: 20\n", encoding="utf-8")
    reset_config(str(config))
    assert default_m_max(nagata) == 20
    assert default_m_max(fibonacci_affine()) == 20


def test_parallel_tableau_matches_sequential(nagata):
    sequential = pascal_tableau(nagata, 5, jobs=1)
    parallel = pascal_tableau(nagata, 5, jobs=2)
    assert parallel.steps == sequential.steps


def test_truncated_tableau_is_low_degree_part_of_exact(vasyunin):
    exact = pascal_tableau(vasyunin, 4)
    truncated = pascal_tableau(vasyunin, 4, 8)
    for k in range(5):
        assert truncated.step(k) == exact.steps[k].truncate(8)


def test_invert_nagata():
    nagata = builtin("nagata").map
    result = invert(normalize(nagata))
    assert result.verified
    assert compose(result.inverse, nagata).is_identity()
    assert result.inverse.degree() <= 25
    assert result.truncation == 25
    assert result.component_m == (13, 13, 1)


def test_invert_identity_returns_identity():
    ident = PolyMap.identity(Ambient(3))
    result = invert(normalize(ident))
    assert result.inverse == ident
    assert result.verified


def test_invert_flags_non_automorphism():
    amb = Ambient(2)
    x1, x2 = vars_of(amb)
    result = invert(normalize(PolyMap([x1 + x2 ** 2, x2 + x1 ** 2])))
    assert not result.verified


def test_reconstruction_identity_on_builtins():
    for name in ("nagata", "simple_triangular", "fibonacci_affine(1, 2)", "identity(3)"):
        f = builtin(name).map
        for m in range(1, 7):
            assert reconstruction_check(f, m), (name, m)


def test_binomial_relation(nagata):
    # F^3 - 3F^2 + 3F - Id = 0
    assert binomial_relation_check(nagata, 3)
    assert not binomial_relation_check(nagata, 2)
    fib = fibonacci_affine()
    for m in range(1, 11):
        assert not binomial_relation_check(fib, m)


def test_formal_inverse_truncated_over_prime_fields(gf2, gf3):
    for field in (gf2, gf3):
        for seed in range(5):
            f = random_triangular(3, 3, seed, field=field)
            g = formal_inverse_truncated(f, 8)
            assert compose(g, f, 8).is_identity(), (field, seed)


def test_formal_inverse_of_identity_is_identity():
    ident = PolyMap.identity(Ambient(2))
    assert formal_inverse_truncated(ident, 4) == ident


def test_formal_inverse_of_affine_map_is_its_linear_inverse():
    f = fibonacci_affine(0, 0)
    g = formal_inverse_truncated(f, 4)
    assert g.degree() == 1
    assert compose(g, f, 4).is_identity()
    assert compose(f, g, 4).is_identity()


def test_formal_inverse_normalises_the_linear_part(nagata):
    amb = nagata.ambient
    x1, x2, x3 = vars_of(amb)
    swap = PolyMap([x2, x1, x3])
    f = compose(swap, nagata)
    g = formal_inverse_truncated(f, 6)
    assert compose(g, f, 6).is_identity()


def test_formal_inverse_needs_a_fixed_origin():
    with pytest.raises(NotNormalForm):
        formal_inverse_truncated(fibonacci_affine(1, 2), 4)
    x1, x2 = vars_of(Ambient(2))
    with pytest.raises(NotNormalForm):
        formal_inverse_truncated(PolyMap([x1 + x2 ** 2 + 1, x2]), 4)


def test_homogeneous_layers(vasyunin, nagata):
    assert homogeneous_layers_check(vasyunin, 3)
    with pytest.raises(NotHomogeneous):
        homogeneous_layers_check(nagata, 3)


def test_pascal_index_preserved_by_extension(nagata):
    status = pascal_check(extend(nagata))
    assert status.index == 3
    assert status.component_indices == (3, 2, 1, 1)


def test_pascal_accepts_rational_affine_offsets():
    f = fibonacci_affine(Fraction(1, 2), 0)
    tab = pascal_tableau(f, 2)
    assert tab.steps[1][0].constant_term() == Fraction(1, 2)


def test_tableau_orders_and_degrees_stay_within_bounds():
    for seed in range(20):
        nf = normalize(random_triangular(2 + seed % 2, 2 + seed % 2, 5000 + seed))
        tab = pascal_tableau(nf, 4)
        for k in range(1, tab.last_index + 1):
            for i, p in enumerate(tab.steps[k].components):
                if p.is_zero():
                    continue
                assert p.order() >= (k - 1) * (nf.d - 1) + nf.orders[i], (seed, k, i)
                assert p.degree() <= nf.D ** (k - 1) * nf.degrees[i], (seed, k, i)


def test_inverse_and_powers_of_finite_maps_are_finite():
    for seed in range(8):
        f = random_triangular(2 + seed % 2, 2, 6000 + seed)
        assert pascal_check(f).is_finite, seed
        result = invert(normalize(f))
        assert result.verified, seed
        assert pascal_check(result.inverse).is_finite, seed
        for k in (2, 3):
            assert pascal_check(iterate(f, k)).is_finite, (seed, k)
