"""End-to-end properties of the engine on the corpus maps."""

from functools import reduce

import numpy as np
import pytest

from pascalis.corpus import (
    fibonacci_affine,
    gh_composition,
    list_builtins,
    random_affine,
    random_linear_conjugate,
    random_tame,
    random_triangular,
)
from pascalis.errors import SingularLinearPart
from pascalis.mapfile import parse_map, serialize_map
from pascalis.nilpotency import (
    johnston_bound_check,
    nilpotency_index,
    strong_nilpotency,
    strong_nilpotency_numeric,
)
from pascalis.pascal import (
    PascalOutcome,
    binomial_relation_check,
    formal_inverse_truncated,
    invert,
    pascal_check,
    pascal_tableau,
    reconstruction_check,
)
from pascalis.polymap import (
    PolyMap,
    compose,
    denormalize_inverse,
    increment,
    iterate,
    jacobian,
    linear_map,
    normalize,
)


def _matrix_power(a, k):
    size = len(a)
    ident = np.identity(size, dtype=object)
    return reduce(np.dot, [np.array(a, dtype=object)] * k, ident)


def _rows(matrix):
    return [[int(v) for v in row] for row in matrix]


def _assert_degree_bounds(f, inverse, nf=None):
    assert inverse.degree() <= f.degree() ** (f.n - 1)
    nf = nf or normalize(f)
    strong = strong_nilpotency(jacobian(nf.h))
    if strong.strongly_nilpotent:
        assert johnston_bound_check(nf, inverse, strong)


def test_nagata_pascal_data(nagata):
    status = pascal_check(nagata)
    assert status.outcome is PascalOutcome.FINITE
    assert status.index == 3
    assert status.component_indices == (3, 2, 1)


def test_nagata_inverse(nagata):
    result = invert(normalize(nagata))
    assert result.verified
    assert compose(result.inverse, nagata) == PolyMap.identity(nagata.ambient)
    assert result.inverse.degree() <= 25
    _assert_degree_bounds(nagata, result.inverse)


@pytest.mark.slow
def test_vasyunin_inverse_matches_golden(vasyunin, vasyunin_inverse):
    result = invert(normalize(vasyunin))
    assert result.verified
    assert result.truncation == 16
    assert serialize_map(result.inverse, "vasyunin_inverse") == \
        serialize_map(vasyunin_inverse, "vasyunin_inverse")
    _assert_degree_bounds(vasyunin, result.inverse)


def test_vasyunin_golden_inverse_respects_degree_bound(vasyunin, vasyunin_inverse):
    assert compose(vasyunin_inverse, vasyunin).is_identity()
    _assert_degree_bounds(vasyunin, vasyunin_inverse)


@pytest.mark.slow
def test_vasyunin_is_not_pascal_finite_within_bound(vasyunin):
    status = pascal_check(vasyunin, 12, term_ceiling=20000)
    assert status.outcome is PascalOutcome.NOT_WITHIN_BOUND
    assert status.probe.certified
    trajectory = status.probe.evidence
    assert [s.k for s in trajectory] == list(range(13))
    assert not trajectory[-1].is_zero
    assert len(status.evidence) >= 5
    third = [step.degrees[2] for step in status.evidence]
    for k in range(3, len(third) - 1):
        assert third[k + 1] > third[k]


@pytest.mark.slow
def test_vasyunin_orbit_has_positive_coefficients(vasyunin):
    # sigma^k(F) = F^(k+1), delta(sigma^k(F)) = F^(k+1) - F^k
    orbit = [iterate(vasyunin, k + 1) for k in range(5)]
    for k, power in enumerate(orbit):
        for i in (1, 2, 4):
            assert all(c > 0 for _, c in power[i].items()), (k, i + 1)
        assert all(c > 0 for _, c in increment(vasyunin, k)[2].items()), k


def test_vasyunin_nilpotency(vasyunin):
    jh = jacobian(normalize(vasyunin).h)
    assert nilpotency_index(jh) == 5
    assert not strong_nilpotency(jh).strongly_nilpotent
    e1, e2 = [1, 0, 0, 0, 0], [0, 1, 0, 0, 0]
    assert not strong_nilpotency_numeric(jh, [e1, e2]).is_zero()


@pytest.mark.parametrize("a, b", [(0, 0), (1, 2)])
def test_fibonacci_affine_recurrence(a, b):
    f = fibonacci_affine(a, b)
    tab = pascal_tableau(f, 20)
    first = [step[0] for step in tab.steps]
    for k in range(3, 21):
        assert first[k] == first[k - 1] + first[k - 2]
    assert pascal_check(f, 20).outcome is PascalOutcome.NOT_WITHIN_BOUND


def test_affine_maps_follow_matrix_powers():
    for seed in range(50):
        n = 1 + seed % 5
        sample = random_affine(n, seed, nilpotent=seed % 2 == 0)
        amb = sample.map.ambient
        tab = pascal_tableau(sample.map, n)
        for k in range(n + 1):
            assert tab.step(k) == linear_map(_rows(_matrix_power(sample.a, k)), amb), (seed, k)
        nilpotent = not _matrix_power(sample.a, n).any()
        assert pascal_check(sample.map, n).is_finite == nilpotent, seed

        try:
            nf = normalize(sample.map)
        except SingularLinearPart:
            continue
        inverse = denormalize_inverse(nf, invert(nf).inverse)
        assert compose(inverse, sample.map).is_identity()
        assert inverse.degree() <= 1


@pytest.mark.slow
def test_strongly_nilpotent_maps_are_pascal_finite():
    for seed in range(100):
        f = random_triangular(2 + seed % 3, 2 + seed % 2, seed)
        assert strong_nilpotency(jacobian(normalize(f).h)).strongly_nilpotent, seed
        assert pascal_check(f).is_finite, seed

    for seed in range(50):
        f = random_triangular(2 + seed % 2, 3, 1000 + seed)
        conj = random_linear_conjugate(f, seed, ops=2).map
        nf = normalize(conj)
        assert strong_nilpotency(jacobian(nf.h)).strongly_nilpotent, seed
        status = pascal_check(conj)
        assert status.outcome is PascalOutcome.FINITE, seed
        assert status.index == pascal_check(f).index, seed
        result = invert(nf)
        assert result.verified, seed
        inverse = denormalize_inverse(nf, result.inverse)
        assert inverse.degree() <= conj.degree() ** (conj.n - 1), seed
        assert compose(inverse, conj).is_identity(), seed


@pytest.mark.slow
def test_triangular_inverses_respect_degree_bounds():
    for seed in range(10):
        f = random_triangular(2 + seed % 2, 3, 2000 + seed)
        nf = normalize(f)
        result = invert(nf)
        assert result.verified, seed
        _assert_degree_bounds(f, result.inverse, nf)


def test_reconstruction_identity():
    for example in list_builtins():
        f = example.map
        heavy = example.name in ("vasyunin", "gh_composition")
        for m in range(1, 7):
            assert reconstruction_check(f, m, 10 if heavy else None), (example.name, m)
    for seed in range(20):
        f = random_triangular(3, 3, 3000 + seed)
        for m in range(1, 7):
            assert reconstruction_check(f, m), (seed, m)


def test_reconstruction_truncation_needs_a_fixed_origin():
    with pytest.raises(ValueError):
        reconstruction_check(fibonacci_affine(1, 2), 2, 5)


def test_binomial_relation(nagata):
    assert binomial_relation_check(nagata, 3)
    fib = fibonacci_affine(1, 2)
    assert not any(binomial_relation_check(fib, m) for m in range(1, 11))


def test_composition_of_finite_maps_need_not_be_finite():
    f = gh_composition()
    x1, x2 = f.ambient.variables()
    g = PolyMap([x1 + x2 ** 3, x2])
    h = PolyMap([x1, x2 + x1 ** 2])
    assert pascal_check(g).index == 2
    assert pascal_check(h).index == 2
    assert compose(g, h) == f
    status = pascal_check(f, 10, term_ceiling=5000)
    assert status.outcome is PascalOutcome.NOT_WITHIN_BOUND


def test_formal_inverse_in_positive_characteristic(gf2, gf3):
    for field in (gf2, gf3):
        for seed in range(20):
            f = random_triangular(2 + seed % 3, 3, 4000 + seed, field=field)
            g = formal_inverse_truncated(f, 8)
            assert compose(g, f, 8) == PolyMap.identity(f.ambient), (field, seed)


def test_parser_round_trip_on_random_maps():
    maps = [example.map for example in list_builtins()]
    maps += [random_triangular(2 + s % 3, 2 + s % 3, s) for s in range(150)]
    maps += [random_tame(2 + s % 2, 2, 2, s).map for s in range(50)]
    for f in maps:
        assert parse_map(serialize_map(f)) == f
