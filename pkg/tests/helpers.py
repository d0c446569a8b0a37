"""Small builders shared by the test modules."""

from pascalis.mapfile import parse_map
from pascalis.poly import Poly
from pascalis.polymap import PolyMap


def vars_of(amb):
    return tuple(amb.variables())


def map_of(text):
    """Parse a map from its component lines, e.g. map_of("vars: x y\\nx + y^2\\ny")."""
    return parse_map(text)


def random_poly(amb, rng, terms=4, max_deg=3, min_deg=0, variables=None):
    """Integer coefficients in [-3, 3] on random monomials of degree in [min_deg, max_deg]."""
    variables = list(range(amb.n)) if variables is None else list(variables)
    mapping = {}
    for _ in range(terms):
        if not variables:
            break
        exps = [0] * amb.n
        for _ in range(int(rng.integers(min_deg, max_deg + 1))):
            exps[variables[int(rng.integers(len(variables)))]] += 1
        mapping[tuple(exps)] = mapping.get(tuple(exps), 0) + int(rng.choice([-3, -2, -1, 1, 2, 3]))
    return Poly.from_dict(amb, mapping)


def random_map(amb, rng, terms=3, max_deg=2):
    return PolyMap([random_poly(amb, rng, terms, max_deg) for _ in range(amb.n)])
